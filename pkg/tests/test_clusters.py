import numpy as np
import pytest

from spinweb import (
    ClusterDecomposition,
    DisorderModel,
    LatticeSpec,
    Variant,
    cluster_size_histogram,
    percolation_clusters,
    read_decomposition,
    sample_disorder,
    write_decomposition,
)
from spinweb.errors import ContractError, FormatError


def _tiny_decomp(L=3, labels=None):
    spec = LatticeSpec(L)
    if labels is None:
        labels = np.zeros(spec.n_sites, dtype=np.int32)
    labels = np.asarray(labels, dtype=np.int32)
    k = int(labels.max()) + 1
    sizes = np.bincount(labels, minlength=k).astype(np.int64)
    model = DisorderModel(Variant.FIXED_H, theta=-0.5)
    return ClusterDecomposition(spec=spec, labels=labels, sizes=sizes, model=model, seed=4)


def test_validate_accepts_consistent_partition():
    d = _tiny_decomp(labels=[0, 0, 1, 1, 2, 2, 2, 3, 3])
    d.validate()
    assert d.n_clusters == 4


def test_validate_rejects_inconsistencies():
    d = _tiny_decomp(labels=[0, 0, 1, 1, 2, 2, 2, 3, 3])
    with pytest.raises(ContractError):
        ClusterDecomposition(d.spec, d.labels, d.sizes + 1, d.model, d.seed).validate()
    with pytest.raises(ContractError):
        ClusterDecomposition(d.spec, d.labels[:-1], d.sizes, d.model, d.seed).validate()
    gappy = np.where(d.labels == 1, 5, d.labels)  # labels no longer dense
    sizes = np.bincount(gappy, minlength=6).astype(np.int64)
    with pytest.raises(ContractError):
        ClusterDecomposition(d.spec, gappy, sizes, d.model, d.seed).validate()


def test_size_histogram():
    d = _tiny_decomp(labels=[0, 0, 1, 1, 2, 2, 2, 3, 3])
    assert cluster_size_histogram(d) == {2: 3, 3: 1}


@pytest.mark.parametrize(
    "model",
    [
        DisorderModel(Variant.FIXED_H, theta=-0.17034),
        DisorderModel(Variant.BOX_H, theta=0.125),
        DisorderModel(Variant.DILUTED, p=0.45),
    ],
)
def test_roundtrip_all_variants(tmp_path, model):
    labels = np.array([0, 1, 0, 1, 2, 2, 2, 2, 0], dtype=np.int32)
    spec = LatticeSpec(3)
    sizes = np.bincount(labels).astype(np.int64)
    d = ClusterDecomposition(spec=spec, labels=labels, sizes=sizes, model=model, seed=77)
    path = tmp_path / "decomp.txt"
    write_decomposition(d, path)
    back = read_decomposition(path)
    assert back.spec.L == 3 and back.seed == 77
    assert back.model == model
    assert np.array_equal(back.labels, labels)
    assert np.array_equal(back.sizes, sizes)


def test_roundtrip_real_percolation(tmp_path):
    spec = LatticeSpec(16)
    inst = sample_disorder(spec, DisorderModel(Variant.DILUTED, p=0.4), 13)
    d = percolation_clusters(inst)
    path = tmp_path / "perc.txt"
    write_decomposition(d, path)
    back = read_decomposition(path)
    assert np.array_equal(back.labels, d.labels)
    text = path.read_text()
    write_decomposition(back, path)
    assert path.read_text() == text  # write -> read -> write is a fixed point


def test_write_requires_model(tmp_path):
    labels = np.zeros(9, dtype=np.int32)
    d = ClusterDecomposition(LatticeSpec(3), labels, np.array([9]))
    with pytest.raises(ContractError):
        write_decomposition(d, tmp_path / "x.txt")


def _write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n")


def test_read_errors_carry_line_numbers(tmp_path):
    path = tmp_path / "bad.txt"
    good = ["2 0 fixed_h theta=0.0", "0 0 0", "1 0 0", "0 1 0", "1 1 0"]

    _write_lines(path, good[:1])
    with pytest.raises(FormatError) as err:
        read_decomposition(path)
    assert err.value.line_no == 1  # too few site lines

    _write_lines(path, good[:2] + ["1 0"] + good[3:])
    with pytest.raises(FormatError) as err:
        read_decomposition(path)
    assert err.value.line_no == 3

    _write_lines(path, good[:2] + ["1 0 zero"] + good[3:])
    with pytest.raises(FormatError) as err:
        read_decomposition(path)
    assert err.value.line_no == 3

    _write_lines(path, good[:2] + ["2 0 0"] + good[3:])
    with pytest.raises(FormatError) as err:
        read_decomposition(path)
    assert err.value.line_no == 3  # x out of range

    _write_lines(path, good[:4] + ["0 0 0"])
    with pytest.raises(FormatError) as err:
        read_decomposition(path)
    assert err.value.line_no == 5  # duplicate site

    _write_lines(path, ["2 0 fixed_h theta=oops"] + good[1:])
    with pytest.raises(FormatError) as err:
        read_decomposition(path)
    assert err.value.line_no == 1

    path.write_text("")
    with pytest.raises(FormatError):
        read_decomposition(path)
