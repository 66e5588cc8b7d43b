import numpy as np
import pytest

from spherenet.data import spectral_initialise
from spherenet.errors import DataError
from spherenet.model_io import SavedModel, dump_model, load_model, parse_model, save_model
from spherenet.network import Identity, network_from_matrices


def test_exact_round_trip(tmp_path):
    net = spectral_initialise([4, 6, 5, 2], [1.0, 0.3, 2.5], seed=3)
    model = SavedModel(net, 12.75, 0.4321, 0.8, 7)
    save_model(tmp_path / "m.txt", model)
    back = load_model(tmp_path / "m.txt")
    assert back.net.dims == net.dims
    assert back.net.mus == net.mus
    for a, b in zip(back.net.layers, net.layers):
        assert a.W.tobytes() == b.W.tobytes()
    assert (back.y_max, back.gain, back.train_fraction, back.split_seed) == (12.75, 0.4321, 0.8, 7)
    assert dump_model(back) == dump_model(model)


def test_missing_scaling_record():
    net = network_from_matrices([np.eye(2)], activation=Identity())
    back = parse_model(dump_model(SavedModel(net)))
    assert back.y_max is None and back.split_seed is None
    assert back.net.activation.name == "identity"


def test_header_layout():
    text = dump_model(SavedModel(spectral_initialise([3, 2], seed=0)))
    assert text.splitlines()[:3] == ["spherenet-model 1", "activation relu", "dims 3 2"]


@pytest.mark.parametrize("mutate", [
    lambda t: t.replace("spherenet-model 1", "spherenet-model 9"),
    lambda t: t.replace("spherenet-model", "other"),
    lambda t: t.replace("dims 3 4 2", "dims 3 5 2"),
    lambda t: "\n".join(t.splitlines()[:-1]),
    lambda t: t.replace("activation relu", "activation tanh"),
])
def test_corrupt_files_rejected(mutate):
    text = dump_model(SavedModel(spectral_initialise([3, 4, 2], seed=0)))
    with pytest.raises(DataError):
        parse_model(mutate(text))


def test_missing_file(tmp_path):
    with pytest.raises(DataError):
        load_model(tmp_path / "absent.txt")
