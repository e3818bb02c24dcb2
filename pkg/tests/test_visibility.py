import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gridvis.grid import OccupancyGrid, disk_map
from gridvis.opcount import count_operations
from gridvis.oracle import compare_masks, raycast_map
from gridvis.visibility import (
    FlowFieldSpec,
    FlowSignWarning,
    VisibilityField,
    VisParams,
    accumulate,
    binarize,
    compute_visibility,
    compute_visibility_curvilinear,
    constant_field,
    intersect,
    union,
)


@st.composite
def grid_and_source(draw, max_side=24, binary=False):
    nx = draw(st.integers(1, max_side))
    ny = draw(st.integers(1, max_side))
    if binary:
        elems = st.sampled_from([0.0, 1.0])
    else:
        elems = st.floats(0.0, 1.0, allow_nan=False)
    cells = draw(arrays(np.float64, (ny, nx), elements=elems))
    src = (draw(st.integers(0, nx - 1)), draw(st.integers(0, ny - 1)))
    return OccupancyGrid(cells), src


def test_empty_grid_all_ones():
    f = compute_visibility(OccupancyGrid.empty(5, 5), (2, 2))
    assert np.all(f.values == 1.0)


def test_source_cell_occupancy():
    cells = np.zeros((3, 3))
    cells[1, 1] = 0.7
    f = compute_visibility(OccupancyGrid(cells), (1, 1))
    assert f[(1, 1)] == pytest.approx(0.3)


def test_source_in_wall_lights_nothing():
    cells = np.zeros((4, 4))
    cells[2, 1] = 1.0
    f = compute_visibility(OccupancyGrid(cells), (1, 2))
    assert not f.values.any()


def test_alpha_decay_along_axis():
    f = compute_visibility(OccupancyGrid.empty(8, 1), (0, 0), VisParams(alpha=0.9))
    np.testing.assert_allclose(f.values[0], 0.9 ** np.arange(1, 9))


def test_field_metadata():
    p = VisParams(alpha=0.95)
    f = compute_visibility(OccupancyGrid.empty(4, 3), (1, 2), p)
    assert f.source == (1, 2) and f.params == p and f.shape == (3, 4)
    assert not f.values.flags.writeable


def test_source_outside_grid():
    with pytest.raises(ValueError, match="source"):
        compute_visibility(OccupancyGrid.empty(4, 4), (4, 0))


@pytest.mark.parametrize("bad", [
    dict(light_strength=1.2), dict(alpha=0.0), dict(dx=0.0), dict(dy=-1.0), dict(threshold=1.0),
])
def test_params_validation(bad):
    with pytest.raises(ValueError):
        VisParams(**bad)


def test_wall_matches_oracle():
    cells = np.zeros((201, 201))
    cells[60:140, 120] = 1.0
    g = OccupancyGrid(cells)
    for src in [(50, 100), (60, 90)]:
        mask = binarize(compute_visibility(g, src))
        oracle = raycast_map(g, src)
        assert (mask.values == oracle.values).mean() >= 0.98
        assert compare_masks(mask, oracle, g).off_boundary == 0


def test_shadow_is_behind_the_wall():
    cells = np.zeros((41, 41))
    cells[10:31, 25] = 1.0
    f = compute_visibility(OccupancyGrid(cells), (10, 20))
    assert f[(35, 20)] == 0.0
    assert f[(20, 20)] == 1.0
    assert f[(35, 2)] > 0.5


@given(grid_and_source(), st.floats(0.0, 1.0), st.floats(0.05, 1.0))
@settings(max_examples=200, deadline=None)
def test_maximum_principle(gs, light, alpha):
    g, src = gs
    f = compute_visibility(g, src, VisParams(light_strength=light, alpha=alpha))
    assert np.all(np.isfinite(f.values))
    assert f.values.min() >= 0.0 and f.values.max() <= light


@given(grid_and_source(), st.floats(0.0, 1.0), st.integers(0, 2**31))
@settings(max_examples=200, deadline=None)
def test_occupancy_monotone(gs, scale, seed):
    g, src = gs
    rng = np.random.default_rng(seed)
    lower = g.cells * rng.uniform(0.0, 1.0, g.cells.shape) * scale
    hi = compute_visibility(OccupancyGrid(lower), src).values
    lo = compute_visibility(g, src).values
    assert np.all(hi >= lo)


@given(grid_and_source(), st.floats(0.2, 5.0), st.floats(0.2, 5.0))
@settings(max_examples=100, deadline=None)
def test_anisotropic_steps_stay_bounded(gs, dx, dy):
    g, src = gs
    f = compute_visibility(g, src, VisParams(dx=dx, dy=dy))
    assert f.values.min() >= 0.0 and f.values.max() <= 1.0


def _dihedral(a):
    for k in range(4):
        r = np.rot90(a, k)
        yield r
        yield r.T


def test_dihedral_symmetry():
    n = 31
    rng = np.random.default_rng(5)
    base = np.zeros((n, n))
    base[rng.integers(0, n, 12), rng.integers(0, n, 12)] = 1.0
    base[n // 2, n // 2] = 0.0
    sym = np.zeros_like(base)
    for t in _dihedral(base):
        sym = np.maximum(sym, t)
    center = (n // 2, n // 2)
    ref = compute_visibility(OccupancyGrid(sym), center).values
    for t in _dihedral(sym):
        assert np.array_equal(t, sym)
    for t_ref in _dihedral(ref):
        assert np.array_equal(t_ref, ref)


def test_dihedral_symmetry_of_transforms():
    """Transforming map and source transforms the field exactly."""
    rng = np.random.default_rng(11)
    cells = (rng.random((17, 17)) < 0.2).astype(float)
    src = (8, 8)
    cells[8, 8] = 0.0
    ref = compute_visibility(OccupancyGrid(cells), src).values
    for k in range(4):
        out = compute_visibility(OccupancyGrid(np.rot90(cells, k)), src).values
        assert np.array_equal(out, np.rot90(ref, k))
    out = compute_visibility(OccupancyGrid(cells.T.copy()), src).values
    assert np.array_equal(out, ref.T)


def test_op_budget_small():
    rng = np.random.default_rng(0)
    g = OccupancyGrid(rng.random((23, 19)))
    for params in (VisParams(), VisParams(dx=1.0, dy=0.7, alpha=0.9)):
        ops = count_operations(g, (7, 12), params)
        assert ops.cells == g.width * g.height
        assert ops.max_per_cell <= 10
        assert np.array_equal(ops.values, compute_visibility(g, (7, 12), params).values)


# --- binarize / intersect / union ------------------------------------------

def test_binarize_inclusive():
    f = constant_field((2, 2), 0.5)
    assert binarize(f, 0.5).values.all()
    assert not binarize(constant_field((2, 2), 0.0)).values.any()


def test_binarize_default_threshold_from_params():
    f = compute_visibility(OccupancyGrid.empty(3, 3), (0, 0), VisParams(threshold=0.3))
    assert binarize(f).values.all()


@given(arrays(np.float64, (6, 7), elements=st.floats(0.0, 1.0)))
def test_binarize_monotone(values):
    f = VisibilityField(values)
    assert np.all(binarize(f, 0.5).values <= binarize(f, 0.2).values)


def _random_field(seed, shape=(9, 8)):
    return VisibilityField(np.random.default_rng(seed).random(shape))


def test_intersect_and_union_identities():
    f = _random_field(1)
    assert np.array_equal(intersect([f]).values, f.values)
    assert np.array_equal(intersect([f, constant_field(f.shape, 1.0)]).values, f.values)
    assert np.array_equal(union([f, constant_field(f.shape, 0.0)]).values, f.values)
    assert np.array_equal(union([f, f]).values, f.values)


def test_accumulate_equals_union():
    fields = [_random_field(s) for s in range(5)]
    acc = np.zeros(fields[0].shape)
    for f in fields:
        accumulate(acc, f)
    assert np.array_equal(acc, union(fields).values)


def test_aggregate_errors():
    with pytest.raises(ValueError):
        union([])
    with pytest.raises(ValueError):
        intersect([_random_field(0, (3, 3)), _random_field(0, (3, 4))])


def test_two_source_intersection_matches_oracle_and():
    cells = np.zeros((61, 61))
    cells[15:46, 30] = 1.0
    g = OccupancyGrid(cells)
    a, b = (10, 30), (50, 30)
    fused = binarize(intersect([compute_visibility(g, a), compute_visibility(g, b)]))
    oracle = raycast_map(g, a).values & raycast_map(g, b).values
    from gridvis.oracle import BinaryMask
    agreement = compare_masks(fused, BinaryMask(oracle), g)
    assert agreement.off_boundary == 0
    # both shadows are excluded
    assert not fused[(55, 30)] and not fused[(5, 30)]


# --- serialization ----------------------------------------------------------

def test_flat_round_trip(tmp_path):
    f = compute_visibility(OccupancyGrid(np.random.default_rng(2).random((7, 11))), (3, 3))
    f.save(tmp_path / "f.bin")
    back = VisibilityField.load(tmp_path / "f.bin")
    assert np.array_equal(back.values, f.values)
    data = (tmp_path / "f.bin").read_bytes()
    assert data[:8] == b"GVFLD64\x00" and len(data) == 16 + 8 * 77


def test_flat_rejects_garbage():
    with pytest.raises(ValueError):
        VisibilityField.from_flat_bytes(b"nonsense" * 3)


def test_pgm_output(tmp_path):
    constant_field((2, 3), 1.0).save(tmp_path / "f.pgm")
    assert (tmp_path / "f.pgm").read_bytes().endswith(b"\xff" * 6)


# --- curvilinear ------------------------------------------------------------

def test_radial_flow_is_bit_exact():
    rng = np.random.default_rng(3)
    g = OccupancyGrid(rng.random((30, 40)))
    p = VisParams(alpha=0.97)
    a = compute_visibility(g, (12, 20), p).values
    b = compute_visibility_curvilinear(g, (12, 20), FlowFieldSpec.radial(), p).values
    assert np.array_equal(a, b)


def test_radial_table_matches_radial():
    rng = np.random.default_rng(4)
    g = OccupancyGrid((rng.random((21, 25)) < 0.15).astype(float))
    src = (9, 13)
    flow = FlowFieldSpec.radial_table(g.width, g.height, src)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        b = compute_visibility_curvilinear(g, src, flow).values
    np.testing.assert_allclose(b, compute_visibility(g, src).values, rtol=0, atol=1e-12)


def test_scaled_radial_empty_grid():
    f = compute_visibility_curvilinear(OccupancyGrid.empty(30, 20), (4, 7), FlowFieldSpec.scaled_radial(2.5),
                                       VisParams(light_strength=0.8))
    assert np.all(f.values == 0.8)


def test_scaled_radial_changes_shadow():
    g = disk_map(120)
    src = (10, 60)
    radial = binarize(compute_visibility(g, src)).values
    curved = binarize(compute_visibility_curvilinear(g, src, FlowFieldSpec.scaled_radial(2.5))).values
    assert (radial ^ curved).any()
    assert radial.sum() != curved.sum()


@given(grid_and_source(max_side=16), st.floats(0.1, 10.0))
@settings(max_examples=100, deadline=None)
def test_scaled_radial_bounded(gs, k):
    g, src = gs
    f = compute_visibility_curvilinear(g, src, FlowFieldSpec.scaled_radial(k))
    assert f.values.min() >= 0.0 and f.values.max() <= 1.0


def test_flow_parse():
    assert FlowFieldSpec.parse("radial").kind == "radial"
    assert FlowFieldSpec.parse("scaled:2.5").k == 2.5
    for bad in ("scaled:0", "scaled:x", "spiral"):
        with pytest.raises(ValueError):
            FlowFieldSpec.parse(bad)


def test_tabulated_validation_names_cell():
    a = np.ones((3, 4))
    b = np.ones((3, 4))
    a[2, 1] = b[2, 1] = 0.0
    with pytest.raises(ValueError, match=r"\(1, 2\)"):
        FlowFieldSpec.tabulated(a, b)


def test_tabulated_sign_warning():
    g = OccupancyGrid.empty(5, 5)
    a = np.ones((5, 5))
    b = np.ones((5, 5))
    with pytest.warns(FlowSignWarning):
        compute_visibility_curvilinear(g, (2, 2), FlowFieldSpec.tabulated(a, b))
