import numpy as np
import pytest

from db.data_access import HEADER, dump_dataset, dump_samples, load_dataset, load_samples, read_config_file
from shared.errors import ConfigError, DataError
from shared.types import TrainConfig
from synthdata.dataset import Sample, generate_dataset


def test_dataset_reloads_bit_exactly(tmp_path):
    split = generate_dataset(TrainConfig(n_train=16, n_eval=8, k_targets=2, seed=3))
    paths = dump_dataset(tmp_path, split)
    assert paths["train"].name == "train.mdfy"
    loaded = load_dataset(tmp_path)
    assert [s.id for s in loaded.train] == [s.id for s in split.train]
    assert all(np.array_equal(a.image, b.image) for a, b in zip(loaded.train, split.train))
    assert sorted(loaded.eval) == [0, 1, 2]
    for d, samples in split.eval.items():
        assert [(s.id, s.label, s.domain_id) for s in loaded.eval[d]] == [(s.id, s.label, s.domain_id) for s in samples]
    assert loaded.domains[2].palette == split.domains[2].palette


def test_file_size_matches_layout(tmp_path):
    split = generate_dataset(TrainConfig(n_train=8, n_eval=4, k_targets=0))
    path = tmp_path / "x.mdfy"
    dump_samples(path, split.train)
    assert path.stat().st_size == HEADER.size + 8 * (4 + 2 + 2 + 16 * 16 * 3 * 4)


def test_bad_magic_is_rejected(tmp_path):
    split = generate_dataset(TrainConfig(n_train=4, n_eval=4, k_targets=0))
    path = tmp_path / "x.mdfy"
    dump_samples(path, split.train)
    raw = bytearray(path.read_bytes())
    raw[:4] = b"NOPE"
    path.write_bytes(bytes(raw))
    with pytest.raises(DataError):
        load_samples(path)


def test_truncated_file_is_rejected(tmp_path):
    split = generate_dataset(TrainConfig(n_train=4, n_eval=4, k_targets=0))
    path = tmp_path / "x.mdfy"
    dump_samples(path, split.train)
    path.write_bytes(path.read_bytes()[:-10])
    with pytest.raises(DataError):
        load_samples(path)


def test_empty_sample_list_is_rejected(tmp_path):
    with pytest.raises(DataError):
        dump_samples(tmp_path / "x.mdfy", [])


def test_config_file_parsing(tmp_path):
    path = tmp_path / "a.conf"
    path.write_text("# comment\nmode = full\n\nt-easy = 0.1  # inline\nlambda=0.5\n")
    assert read_config_file(path) == {"mode": "full", "t_easy": "0.1", "lambda": "0.5"}


def test_malformed_config_line_names_the_line(tmp_path):
    path = tmp_path / "bad.conf"
    path.write_text("mode = full\njust-a-word\n")
    with pytest.raises(ConfigError) as exc:
        read_config_file(path)
    assert exc.value.key == "bad.conf:2"


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        read_config_file(tmp_path / "absent.conf")


def test_unknown_target_domain_is_rejected(tmp_path):
    split = generate_dataset(TrainConfig(n_train=4, n_eval=4, k_targets=1))
    split.eval[9] = [Sample(id=s.id + 100, image=s.image, label=s.label, domain_id=9) for s in split.eval[1]]
    dump_dataset(tmp_path, split)
    with pytest.raises(DataError):
        load_dataset(tmp_path)
