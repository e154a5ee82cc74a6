"""Embedding-file format: round trips, corruption fixtures, config parsing."""

import struct

import numpy as np
import pytest

from sempool.errors import (
    BadMagic,
    ConfigError,
    FormatError,
    ManifestMismatch,
    NormViolation,
    TruncatedPayload,
    VersionUnsupported,
)
from sempool.fileio import (
    MAGIC,
    RunConfig,
    ensemble_matrix,
    load_config,
    read_embeddings,
    read_jsonl,
    write_csv,
    write_embeddings,
    write_jsonl,
)
from sempool.selection import EmbeddingMatrix
from tests.conftest import matrix_from, unit_rows


def random_matrix(rng, count=None, dim=None):
    count = count or int(rng.integers(1, 12))
    dim = dim or int(rng.integers(2, 24))
    kinds = [str(rng.choice(["original", "conjugated"])) for _ in range(count)]
    return matrix_from(
        unit_rows(rng, count, dim), [f"label {i} é" for i in range(count)], kinds=kinds
    )


class TestRoundTrip:
    def test_write_read_write_is_byte_identical(self, rng, tmp_path):
        for trial in range(10):
            matrix = random_matrix(rng)
            first = tmp_path / f"emb-{trial}.bin"
            write_embeddings(matrix, first)
            loaded = read_embeddings(first)
            second = tmp_path / f"emb-{trial}-copy.bin"
            write_embeddings(loaded, second)
            assert first.read_bytes() == second.read_bytes()
            man_a = (tmp_path / f"emb-{trial}.bin.manifest.jsonl").read_bytes()
            man_b = (tmp_path / f"emb-{trial}-copy.bin.manifest.jsonl").read_bytes()
            assert man_a == man_b

    def test_payload_bits_survive(self, rng, tmp_path):
        matrix = random_matrix(rng, count=5, dim=7)
        path = tmp_path / "emb.bin"
        write_embeddings(matrix, path)
        loaded = read_embeddings(path)
        assert np.array_equal(
            loaded.vectors.view(np.uint32), matrix.vectors.view(np.uint32)
        )
        assert loaded.manifest == matrix.manifest


class TestCorruption:
    def write_sample(self, rng, tmp_path):
        matrix = random_matrix(rng, count=4, dim=6)
        path = tmp_path / "emb.bin"
        write_embeddings(matrix, path)
        return path

    def test_bad_magic(self, rng, tmp_path):
        path = self.write_sample(rng, tmp_path)
        blob = path.read_bytes()
        path.write_bytes(b"NOTEMB" + blob[6:])
        with pytest.raises(BadMagic):
            read_embeddings(path)

    def test_unsupported_version(self, rng, tmp_path):
        path = self.write_sample(rng, tmp_path)
        blob = bytearray(path.read_bytes())
        blob[6:8] = struct.pack("<H", 99)
        path.write_bytes(bytes(blob))
        with pytest.raises(VersionUnsupported):
            read_embeddings(path)

    def test_truncated_payload_reports_offset(self, rng, tmp_path):
        path = self.write_sample(rng, tmp_path)
        blob = path.read_bytes()
        path.write_bytes(blob[:-10])
        with pytest.raises(TruncatedPayload) as excinfo:
            read_embeddings(path)
        assert excinfo.value.byte_offset == len(blob) - 10
        assert str(excinfo.value.byte_offset) in str(excinfo.value)

    def test_trailing_bytes_rejected(self, rng, tmp_path):
        path = self.write_sample(rng, tmp_path)
        path.write_bytes(path.read_bytes() + b"JUNK")
        with pytest.raises(FormatError):
            read_embeddings(path)

    def test_manifest_count_mismatch(self, rng, tmp_path):
        path = self.write_sample(rng, tmp_path)
        manifest = path.with_name(path.name + ".manifest.jsonl")
        lines = manifest.read_text(encoding="utf-8").splitlines()
        manifest.write_text("\n".join(lines[:-1]) + "\n", encoding="utf-8")
        with pytest.raises(ManifestMismatch):
            read_embeddings(path)

    def test_manifest_missing(self, rng, tmp_path):
        path = self.write_sample(rng, tmp_path)
        path.with_name(path.name + ".manifest.jsonl").unlink()
        with pytest.raises(ManifestMismatch):
            read_embeddings(path)

    def test_manifest_index_disorder(self, rng, tmp_path):
        path = self.write_sample(rng, tmp_path)
        manifest = path.with_name(path.name + ".manifest.jsonl")
        lines = manifest.read_text(encoding="utf-8").splitlines()
        lines[0], lines[1] = lines[1], lines[0]
        manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
        with pytest.raises(ManifestMismatch):
            read_embeddings(path)

    def test_norm_violation_without_flag(self, rng, tmp_path):
        path = self.write_sample(rng, tmp_path)
        blob = bytearray(path.read_bytes())
        # double the first row's first component
        (value,) = struct.unpack_from("<f", blob, 17)
        struct.pack_into("<f", blob, 17, value + 0.5)
        path.write_bytes(bytes(blob))
        with pytest.raises(NormViolation):
            read_embeddings(path)

    def test_renormalize_flag_accepts_scaled_rows(self, rng, tmp_path):
        rows = unit_rows(rng, 3, 5) * 2.0  # uniformly scaled: direction intact
        path = tmp_path / "emb.bin"
        header = struct.pack("<6sHIIB", MAGIC, 1, 5, 3, 1)
        payload = rows.astype("<f4").tobytes()
        path.write_bytes(header + payload)
        write_jsonl(
            path.with_name(path.name + ".manifest.jsonl"),
            [
                {"index": i, "label": f"l{i}", "kind": "original", "prompt_count": 1}
                for i in range(3)
            ],
        )
        loaded = read_embeddings(path)
        norms = np.linalg.norm(loaded.vectors.astype(np.float64), axis=1)
        np.testing.assert_allclose(norms, 1.0, atol=1e-6)


class TestEnsembleMatrix:
    def test_per_prompt_blocks_collapse(self, rng):
        rows = unit_rows(rng, 6, 8)
        matrix = matrix_from(rows, ["cat", "cat", "cat", "dog", "dog", "eel"])
        collapsed = ensemble_matrix(matrix)
        assert collapsed.labels() == ["cat", "dog", "eel"]
        assert [rec.prompt_count for rec in collapsed.manifest] == [3, 2, 1]
        norms = np.linalg.norm(collapsed.vectors.astype(np.float64), axis=1)
        np.testing.assert_allclose(norms, 1.0, atol=1e-6)

    def test_unique_labels_pass_through(self, rng):
        matrix = matrix_from(unit_rows(rng, 4, 8))
        collapsed = ensemble_matrix(matrix)
        assert collapsed.count == 4
        np.testing.assert_allclose(
            collapsed.vectors.astype(np.float64),
            matrix.vectors.astype(np.float64),
            atol=1e-6,
        )


class TestCsvAndJsonl:
    def test_csv_layout_and_determinism(self, tmp_path):
        path_a = tmp_path / "a.csv"
        path_b = tmp_path / "b.csv"
        rows = [(1, "x", 0.25), (2, "y", 1e-30)]
        write_csv(path_a, ["index", "name", "value"], rows)
        write_csv(path_b, ["index", "name", "value"], rows)
        assert path_a.read_bytes() == path_b.read_bytes()
        text = path_a.read_text(encoding="utf-8")
        assert text.splitlines()[0] == "index,name,value"
        assert "1e-30" in text
        assert "\r" not in text

    def test_jsonl_round_trip(self, tmp_path):
        path = tmp_path / "records.jsonl"
        records = [{"a": 1, "b": "café"}, {"a": 2, "b": [1, 2]}]
        write_jsonl(path, records)
        assert read_jsonl(path) == records


class TestRunConfig:
    def test_defaults(self):
        config = load_config(None)
        assert config.ratio == 0.15
        assert config.percentile == 100.0
        assert config.group_count == 100
        assert config.temperature == 0.01

    def test_file_values_and_comments(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(
            "# pipeline config\nratio = 0.3\nseed = 7\n"
            "original_prefixes = the | a photo of the\n",
            encoding="utf-8",
        )
        config = load_config(path)
        assert config.ratio == 0.3
        assert config.seed == 7
        assert config.original_prefixes == ("the", "a photo of the")

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("nonsense = 1\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_bad_value_rejected(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("ratio = lots\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_overrides_beat_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("ratio = 0.4\n", encoding="utf-8")
        config = load_config(path).with_overrides(ratio=0.2, seed=None)
        assert config.ratio == 0.2
        assert config.seed == 0
