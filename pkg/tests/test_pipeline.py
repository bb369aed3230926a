import numpy as np
import pytest

from tensorring import (ConvGeometry, DenseTensor, FlopCounter, LayerDims, ShapeError,
                        TRConvLayer, chain_ranks, conv2d_direct, flops_tr,
                        min_storage_search, tr_convolution, tr_reconstruct, tr_svd)
from tensorring.ring import TRCores


def rel_err(got: np.ndarray, want: np.ndarray) -> float:
    denom = float(np.linalg.norm(want.astype(np.float64)))
    diff = float(np.linalg.norm(got.astype(np.float64) - want.astype(np.float64)))
    return diff / denom if denom else diff


class TestFlopCounter:
    def test_accumulates(self):
        c = FlopCounter()
        c.add("input_mix", (2, 3), 4)
        c.add("input_mix", (1, 1), 1)
        assert c.counts["input_mix"] == 25
        assert c.total == 25
        assert c.as_tuple() == (25, 0, 0, 0)

    def test_unknown_stage(self):
        with pytest.raises(KeyError):
            FlopCounter().add("bogus", (1,), 1)


class TestTRConvLayer:
    def test_requires_four_way_kernel(self, rng):
        g = rng.standard_normal((1, 3, 1))
        tr = TRCores((g, g, g), 0, (3, 3, 3))
        with pytest.raises(ShapeError):
            TRConvLayer(tr)

    def test_kernel_extent_properties(self, rng):
        w = DenseTensor(rng.standard_normal((6, 4, 3, 2)))
        layer = TRConvLayer(tr_svd(w, eps=0.0, shift=2))
        assert (layer.out_channels, layer.in_channels) == (6, 4)
        assert (layer.kernel_h, layer.kernel_w) == (3, 2)

    @pytest.mark.parametrize("shift", [0, 1, 2, 3])
    def test_stage_cores_carry_the_right_modes(self, rng, shift):
        w = DenseTensor(rng.standard_normal((6, 4, 3, 2)))
        layer = TRConvLayer(tr_svd(w, eps=0.0, shift=shift))
        in_core, v_core, h_core, out_core = layer.stage_cores()
        assert in_core.shape[1] == 4   # input channels
        assert v_core.shape[1] == 3    # kernel height
        assert h_core.shape[1] == 2    # kernel width
        assert out_core.shape[1] == 6  # output channels

    def test_from_dense_uses_the_search_winner(self, rng):
        w = DenseTensor(rng.standard_normal((6, 4, 3, 3)))
        layer = TRConvLayer.from_dense(w, eps=0.0)
        res = min_storage_search(w, eps=0.0)
        assert layer.tr.shift == res.shift
        assert layer.tr.ranks == res.tr.ranks
        assert layer.geometry == ConvGeometry()


class TestEquivalence:
    @pytest.mark.parametrize("shift", [0, 1, 2, 3])
    @pytest.mark.parametrize("stride", [1, 2])
    @pytest.mark.parametrize("padding", [0, 1])
    def test_pipeline_matches_direct_convolution(self, rng, shift, stride, padding):
        w = DenseTensor(rng.standard_normal((6, 4, 3, 3)))
        x = DenseTensor(rng.standard_normal((9, 10, 4)))
        g = ConvGeometry(stride, padding)
        tr = tr_svd(w, eps=0.0, shift=shift)
        want = conv2d_direct(x, tr_reconstruct(tr), g)
        got, _ = tr_convolution(x, TRConvLayer(tr, g))
        assert got.dims == want.dims
        assert rel_err(got.data, want.data) <= 1e-10

    def test_lossy_kernel_still_matches_its_reconstruction(self, rng):
        w = DenseTensor(rng.standard_normal((8, 6, 3, 3)))
        x = DenseTensor(rng.standard_normal((11, 11, 6)))
        g = ConvGeometry(1, 1)
        tr = tr_svd(w, eps=0.5)
        want = conv2d_direct(x, tr_reconstruct(tr), g)
        got, _ = tr_convolution(x, TRConvLayer(tr, g))
        assert rel_err(got.data, want.data) <= 1e-10

    def test_float32_tolerance(self, rng):
        w = DenseTensor(rng.standard_normal((6, 4, 3, 3)).astype(np.float32))
        x = DenseTensor(rng.standard_normal((9, 9, 4)).astype(np.float32))
        g = ConvGeometry(2, 1)
        tr = tr_svd(w, eps=0.0, shift=1)
        want = conv2d_direct(x, tr_reconstruct(tr), g)
        got, _ = tr_convolution(x, TRConvLayer(tr, g))
        assert got.dtype == np.float32
        assert rel_err(got.data, want.data) <= 1e-4

    def test_strided_output_extents(self, rng):
        """Odd spans floor the output extent, matching the direct oracle."""
        w = DenseTensor(rng.standard_normal((2, 3, 3, 3)))
        x = DenseTensor(rng.standard_normal((8, 8, 3)))
        g = ConvGeometry(2, 1)
        tr = tr_svd(w, eps=0.0)
        got, _ = tr_convolution(x, TRConvLayer(tr, g))
        assert got.dims == (4, 4, 2)
        want = conv2d_direct(x, tr_reconstruct(tr), g)
        assert rel_err(got.data, want.data) <= 1e-10

    def test_input_validation(self, rng):
        w = DenseTensor(rng.standard_normal((6, 4, 3, 3)))
        layer = TRConvLayer(tr_svd(w, eps=0.0))
        with pytest.raises(ShapeError):
            tr_convolution(DenseTensor(rng.standard_normal((9, 9, 5))), layer)
        with pytest.raises(ShapeError):
            tr_convolution(DenseTensor(rng.standard_normal((9, 9))), layer)


class TestInstrumentedCounts:
    @pytest.mark.parametrize("shift", [0, 1, 2, 3])
    @pytest.mark.parametrize("stride,padding", [(1, 0), (2, 1)])
    def test_counter_equals_closed_form(self, rng, shift, stride, padding):
        w = DenseTensor(rng.standard_normal((6, 4, 3, 3)))
        x = DenseTensor(rng.standard_normal((9, 10, 4)))
        g = ConvGeometry(stride, padding)
        tr = tr_svd(w, eps=0.2, shift=shift)
        _, counter = tr_convolution(x, TRConvLayer(tr, g))
        dims = LayerDims.for_conv(6, 4, 3, 3, in_h=9, in_w=10,
                                  stride=stride, padding=padding)
        assert counter.total == flops_tr(tr.ranks, dims, shift)

    def test_counter_stage_terms(self, rng):
        w = DenseTensor(rng.standard_normal((6, 4, 3, 3)))
        x = DenseTensor(rng.standard_normal((9, 10, 4)))
        g = ConvGeometry(2, 1)
        tr = tr_svd(w, eps=0.0, shift=3)
        _, counter = tr_convolution(x, TRConvLayer(tr, g))
        r, s1, s2, s3 = chain_ranks(tr.ranks, 3)
        o1 = g.out_size(9, 3)
        o2 = g.out_size(10, 3)
        assert counter.as_tuple() == (
            r * 4 * s1 * 9 * 10,
            s1 * 3 * s2 * r * o1 * 10,
            s2 * 3 * s3 * r * o1 * o2,
            s3 * 6 * r * o1 * o2,
        )
