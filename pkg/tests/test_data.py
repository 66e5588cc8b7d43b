import numpy as np
import pytest

from spherenet.data import (RawDataset, Split, apply_scaling, load_csv, normalise_data, read_csv_rows,
                            spectral_initialise, train_count)
from spherenet.errors import ContractError, DataError
from spherenet.matrix_core import frob_norm
from spherenet.network import lipschitz_bound


def write_csv(path, rows, header=None):
    lines = [header] if header else []
    lines += [",".join(repr(float(v)) for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def raw():
    rng = np.random.default_rng(0)
    train = Split(rng.normal(size=(30, 4)) * 5, rng.normal(size=(30, 2)) * 3)
    test = Split(rng.normal(size=(8, 4)), rng.normal(size=(8, 2)))
    return RawDataset(train, test)


class TestSpectralInitialise:
    def test_unit_spheres(self):
        for seed in range(5):
            net = spectral_initialise([5, 7, 3], [1.0, 1.0], seed)
            for p in net.layers:
                assert abs(frob_norm(p.W) - 1.0) <= 1e-12

    def test_custom_radii(self):
        net = spectral_initialise([5, 7, 3], [0.5, 4.0], 1)
        assert [frob_norm(p.W) for p in net.layers] == pytest.approx([0.5, 4.0], rel=1e-12)

    def test_deterministic(self):
        a = spectral_initialise([12, 25, 30, 15, 3], seed=7)
        b = spectral_initialise([12, 25, 30, 15, 3], seed=7)
        for p, q in zip(a.layers, b.layers):
            assert p.W.tobytes() == q.W.tobytes()
        c = spectral_initialise([12, 25, 30, 15, 3], seed=8)
        assert a.layers[0].W.tobytes() != c.layers[0].W.tobytes()

    def test_reference_shapes(self):
        net = spectral_initialise([12, 25, 30, 15, 3], seed=0)
        assert [p.shape for p in net.layers] == [(25, 12), (30, 25), (15, 30), (3, 15)]
        assert net.dims == [12, 25, 30, 15, 3]

    def test_bad_arguments(self):
        with pytest.raises(ContractError):
            spectral_initialise([3], seed=0)
        with pytest.raises(ContractError):
            spectral_initialise([3, 2], [1.0, 1.0], 0)
        with pytest.raises(ContractError):
            spectral_initialise([3, 2], [0.0], 0)


class TestNormaliseData:
    def test_scaling_invariants(self, raw):
        net = spectral_initialise([4, 6, 2], seed=3)
        data = normalise_data(raw, net)
        gain = lipschitz_bound(net)
        assert data.gain == pytest.approx(gain, rel=1e-12)
        for part in (data.train, data.test):
            np.testing.assert_allclose(np.linalg.norm(part.x, axis=1), 1.0, atol=1e-12)
        yn = np.linalg.norm(data.train.y, axis=1)
        assert np.all(yn <= data.gain * (1 + 1e-9))
        assert yn.max() == pytest.approx(data.gain, rel=1e-14)
        assert data.Q == pytest.approx(1.0, abs=1e-12)

    def test_round_trip(self, raw):
        net = spectral_initialise([4, 6, 2], seed=3)
        data = normalise_data(raw, net)
        np.testing.assert_allclose(data.train.y * data.y_max / data.gain, raw.train.y, rtol=1e-12)
        np.testing.assert_allclose(data.train.x * data.train_x_norms[:, None], raw.train.x, rtol=1e-12)
        np.testing.assert_allclose(data.test.x * data.test_x_norms[:, None], raw.test.x, rtol=1e-12)

    def test_test_target_beyond_train_max(self, raw):
        y_max = np.linalg.norm(raw.train.y, axis=1).max()
        big = np.array([[2 * y_max, 0.0]])
        raw2 = RawDataset(raw.train, Split(np.ones((1, 4)), big))
        data = normalise_data(raw2, spectral_initialise([4, 6, 2], seed=3))
        assert np.linalg.norm(data.test.y[0]) == pytest.approx(2 * data.gain, rel=1e-14)

    def test_zero_input_row_named(self, raw):
        x = raw.train.x.copy()
        x[4] = 0.0
        with pytest.raises(DataError, match="train row 4"):
            normalise_data(RawDataset(Split(x, raw.train.y), raw.test), spectral_initialise([4, 2], seed=0))

    def test_all_zero_targets(self, raw):
        bad = RawDataset(Split(raw.train.x, np.zeros_like(raw.train.y)), raw.test)
        with pytest.raises(DataError):
            normalise_data(bad, spectral_initialise([4, 2], seed=0))

    def test_schema_mismatch(self, raw):
        with pytest.raises(DataError):
            normalise_data(raw, spectral_initialise([5, 2], seed=0))

    def test_apply_scaling_reuses_factors(self, raw):
        data = apply_scaling(raw, 2.0, 0.5)
        np.testing.assert_allclose(data.train.y, raw.train.y * 0.25)
        assert data.target_scale == 4.0


class TestLoadCsv:
    def test_split_sizes(self, tmp_path):
        rows = np.arange(10 * 5, dtype=float).reshape(10, 5) + 1
        raw = load_csv(write_csv(tmp_path / "d.csv", rows), 3, 2, 0.8, 0)
        assert (len(raw.train), len(raw.test)) == (8, 2)
        # every row lands in exactly one split
        got = np.vstack([np.hstack([raw.train.x, raw.train.y]), np.hstack([raw.test.x, raw.test.y])])
        np.testing.assert_array_equal(np.sort(got, axis=0), rows)

    def test_deterministic_split(self, tmp_path):
        rows = np.random.default_rng(0).normal(size=(50, 4))
        p = write_csv(tmp_path / "d.csv", rows)
        a, b = load_csv(p, 3, 1, 0.8, 11), load_csv(p, 3, 1, 0.8, 11)
        np.testing.assert_array_equal(a.train.x, b.train.x)
        np.testing.assert_array_equal(a.test.y, b.test.y)

    def test_reference_dataset_size(self):
        assert train_count(28001, 0.8) == 22400
        assert 28001 - train_count(28001, 0.8) == 5601
        assert train_count(100, 0.29) == 29

    def test_header_and_scientific_notation(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("a,b,c\n1e-3,2.5E2,-3\n4,5,6\n")
        arr = read_csv_rows(p, 2, 1)
        np.testing.assert_array_equal(arr, [[1e-3, 250.0, -3.0], [4.0, 5.0, 6.0]])

    def test_malformed_value_reports_line(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("1,2,3\n4,x,6\n")
        with pytest.raises(DataError, match="line 2"):
            read_csv_rows(p, 2, 1)

    def test_wrong_column_count(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("1,2,3\n4,5\n")
        with pytest.raises(DataError, match="line 2: expected 3 columns"):
            read_csv_rows(p, 2, 1)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_csv(tmp_path / "nope.csv", 2, 1)

    def test_bad_fraction(self, tmp_path):
        p = write_csv(tmp_path / "d.csv", np.ones((4, 3)))
        with pytest.raises(ContractError):
            load_csv(p, 2, 1, 1.0, 0)


def test_full_pipeline_is_bitwise_deterministic(tmp_path):
    rows = np.random.default_rng(9).normal(size=(40, 6))
    p = write_csv(tmp_path / "d.csv", rows)

    def run():
        raw = load_csv(p, 4, 2, 0.75, 3)
        net = spectral_initialise([4, 5, 2], seed=3)
        return net, normalise_data(raw, net)

    (n1, d1), (n2, d2) = run(), run()
    assert d1.train.y.tobytes() == d2.train.y.tobytes()
    assert d1.test.x.tobytes() == d2.test.x.tobytes()
    assert d1.gain == d2.gain and d1.Q == d2.Q
    assert all(a.W.tobytes() == b.W.tobytes() for a, b in zip(n1.layers, n2.layers))
