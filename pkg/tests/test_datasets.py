"""Dataset container, loader, generator, and CSV round-trip tests."""

from __future__ import annotations

import math

import numpy as np
import pytest

from defectsim.datasets import (
    Dataset,
    DatasetFormatError,
    ModuleRecord,
    generate_synthetic,
    load_dataset,
    save_csv,
)


def write(path, text: str) -> str:
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestModuleRecord:
    def test_valid(self):
        rec = ModuleRecord(id="m1", features=(1.0, -2.5), true_label=1)
        assert rec.true_label == 1 and rec.features == (1.0, -2.5)

    @pytest.mark.parametrize("label", [-1, 2, 7])
    def test_label_must_be_binary(self, label):
        with pytest.raises(ValueError):
            ModuleRecord(id="m", features=(0.0,), true_label=label)

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), -float("inf")])
    def test_non_finite_feature_rejected(self, bad):
        with pytest.raises(ValueError):
            ModuleRecord(id="m", features=(bad,), true_label=0)

    def test_frozen(self):
        rec = ModuleRecord(id="m", features=(0.0,), true_label=0)
        with pytest.raises(AttributeError):
            rec.true_label = 1  # type: ignore[misc]


class TestDataset:
    def test_accessors(self):
        records = (
            ModuleRecord("a", (1.0, 2.0), 1),
            ModuleRecord("b", (3.0, 4.0), 0),
            ModuleRecord("c", (5.0, 6.0), 1),
        )
        data = Dataset(name="d", feature_names=("x", "y"), records=records)
        assert len(data) == 3
        assert data.defect_count() == 2
        np.testing.assert_array_equal(
            data.feature_matrix(), [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]
        )
        np.testing.assert_array_equal(data.labels(), [1, 0, 1])
        assert data.labels().dtype.kind == "i"

    def test_width_mismatch_rejected(self):
        with pytest.raises(ValueError):
            Dataset(
                name="d",
                feature_names=("x", "y"),
                records=(ModuleRecord("a", (1.0,), 0),),
            )


class TestGenerateSynthetic:
    def test_shape_and_names(self):
        data = generate_synthetic(50, 0.3, n_features=7, seed=3)
        assert len(data) == 50
        assert data.feature_names == tuple(f"f{j}" for j in range(1, 8))
        assert data.feature_matrix().shape == (50, 7)

    def test_deterministic_per_seed(self):
        a = generate_synthetic(40, 0.25, n_features=5, seed=9)
        b = generate_synthetic(40, 0.25, n_features=5, seed=9)
        c = generate_synthetic(40, 0.25, n_features=5, seed=10)
        assert a.records == b.records
        assert a.records != c.records

    def test_defect_count_concentrates(self):
        # Binomial(10000, 0.3): observed count within 3 sigma of the mean.
        data = generate_synthetic(10000, 0.3, n_features=2, seed=123)
        sigma = math.sqrt(10000 * 0.3 * 0.7)
        assert abs(data.defect_count() - 3000) <= 3 * sigma

    def test_separation_controls_centroid_distance(self):
        data = generate_synthetic(8000, 0.5, n_features=6, separation=1.5, seed=4)
        x = data.feature_matrix()
        y = data.labels().astype(bool)
        gap = np.linalg.norm(x[y].mean(axis=0) - x[~y].mean(axis=0))
        assert abs(gap - 1.5) < 0.15

    def test_zero_separation_mixes_classes(self):
        data = generate_synthetic(8000, 0.5, n_features=6, separation=0.0, seed=4)
        x = data.feature_matrix()
        y = data.labels().astype(bool)
        gap = np.linalg.norm(x[y].mean(axis=0) - x[~y].mean(axis=0))
        assert gap < 0.15

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n_modules": 9},
            {"defect_rate": 0.0},
            {"defect_rate": 1.0},
            {"n_features": 0},
            {"separation": -1.0},
        ],
    )
    def test_invalid_parameters(self, kwargs):
        base = {"n_modules": 20, "defect_rate": 0.3}
        base.update(kwargs)
        with pytest.raises(ValueError):
            generate_synthetic(**base)


class TestLoadDataset:
    def test_basic(self, tmp_path):
        path = write(
            tmp_path / "mod.csv",
            "name,loc,cc,bug\nalpha,10,1,0\nbeta,20,3,2\n",
        )
        data = load_dataset(path)
        assert data.name == "mod"
        assert data.feature_names == ("loc", "cc")
        assert [r.id for r in data.records] == ["alpha", "beta"]
        assert [r.true_label for r in data.records] == [0, 1]

    def test_label_rule_override(self, tmp_path):
        path = write(tmp_path / "m.csv", "name,loc,bug\na,1,1\nb,2,2\n")
        data = load_dataset(path, label_rule=lambda v: v > 1)
        assert [r.true_label for r in data.records] == [0, 1]

    def test_custom_label_column(self, tmp_path):
        path = write(tmp_path / "m.csv", "name,loc,defects\na,1,0\nb,2,1\n")
        data = load_dataset(path, label_column="defects")
        assert [r.true_label for r in data.records] == [0, 1]

    def test_multiple_identifier_columns_joined(self, tmp_path):
        path = write(
            tmp_path / "m.csv", "pkg,cls,loc,bug\ncore,Main,10,0\nutil,Aux,20,1\n"
        )
        data = load_dataset(path)
        assert [r.id for r in data.records] == ["core/Main", "util/Aux"]

    def test_no_identifier_column_gets_row_ids(self, tmp_path):
        path = write(tmp_path / "m.csv", "loc,cc,bug\n1,2,0\n3,4,1\n")
        data = load_dataset(path)
        assert [r.id for r in data.records] == ["r0", "r1"]

    def test_mixed_column_rejected_with_line_number(self, tmp_path):
        path = write(tmp_path / "m.csv", "name,loc,bug\na,10,0\nb,oops,1\n")
        with pytest.raises(DatasetFormatError, match="line 3"):
            load_dataset(path)

    def test_missing_label_column(self, tmp_path):
        path = write(tmp_path / "m.csv", "name,loc\na,1\n")
        with pytest.raises(DatasetFormatError, match="label column"):
            load_dataset(path)

    def test_non_numeric_label(self, tmp_path):
        path = write(tmp_path / "m.csv", "name,loc,bug\na,1,yes\n")
        with pytest.raises(DatasetFormatError, match="label"):
            load_dataset(path)

    def test_empty_file(self, tmp_path):
        path = write(tmp_path / "m.csv", "")
        with pytest.raises(DatasetFormatError, match="empty"):
            load_dataset(path)

    def test_header_only(self, tmp_path):
        path = write(tmp_path / "m.csv", "name,loc,bug\n")
        with pytest.raises(DatasetFormatError, match="no data rows"):
            load_dataset(path)

    def test_ragged_row_rejected(self, tmp_path):
        path = write(tmp_path / "m.csv", "name,loc,bug\na,1,0\nb,2\n")
        with pytest.raises(DatasetFormatError, match="line 3"):
            load_dataset(path)

    def test_non_finite_feature_rejected(self, tmp_path):
        path = write(tmp_path / "m.csv", "name,loc,bug\na,nan,0\n")
        with pytest.raises(DatasetFormatError, match="non-finite"):
            load_dataset(path)


class TestCsvRoundTrip:
    def test_synthetic_round_trip(self, tmp_path):
        original = generate_synthetic(25, 0.4, n_features=3, seed=77, name="rt")
        path = tmp_path / "rt.csv"
        save_csv(original, path)
        loaded = load_dataset(path)
        assert loaded.feature_names == original.feature_names
        assert [r.id for r in loaded.records] == [r.id for r in original.records]
        assert [r.true_label for r in loaded.records] == [
            r.true_label for r in original.records
        ]
        # repr-based serialization keeps float values bit-exact.
        np.testing.assert_array_equal(
            loaded.feature_matrix(), original.feature_matrix()
        )

    def test_save_uses_unix_newlines(self, tmp_path):
        data = generate_synthetic(10, 0.3, n_features=2, seed=1)
        path = tmp_path / "n.csv"
        save_csv(data, path)
        raw = path.read_bytes()
        assert b"\r" not in raw
