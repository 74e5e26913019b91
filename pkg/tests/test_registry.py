import json
import os
import random

import pytest

from darkit.errors import ConflictError, NotFoundError, ValidationError
from darkit.registry import Registry, RegistryEntry, sha256_hex


@pytest.fixture()
def reg(tmp_path):
    r = Registry(tmp_path)
    r.seed_builtin()
    return r


def manifest_for(name, kind, version, files, **extra):
    return {"name": name, "kind": kind, "version": version,
            "description": "test entry",
            "files": [{"path": p, "sha256": sha256_hex(d), "bytes": len(d)}
                      for p, d in files.items()],
            **extra}


class TestSeed:
    def test_ten_entries(self, reg):
        assert len(reg.list_entries()) == 10
        assert len(reg.list_entries("dataset")) == 4
        assert len(reg.list_entries("tokenizer")) == 5
        assert len(reg.list_entries("model")) == 1

    def test_idempotent(self, reg):
        reg.seed_builtin()
        reg.seed_builtin()
        assert len(reg.list_entries()) == 10

    def test_model_bundle_verifies(self, reg):
        result = reg.verify_entry("tiny-spike-gpt", "model", "1.0.0")
        assert result["passed"]
        assert [f["path"] for f in result["files"]] == ["tiny_spike_gpt.sd"]

    def test_model_has_schema(self, reg):
        entry = reg.get("tiny-spike-gpt", "model")
        names = [s.name for s in entry.params_schema]
        assert names == ["lr", "batch_size", "epochs", "steps", "optimizer", "verbose"]

    def test_sorted_listing(self, reg):
        keys = [e.key() for e in reg.list_entries()]
        assert keys == sorted(keys)


class TestAddRemove:
    def test_add_and_fetch(self, reg, tmp_path):
        files = {"data.txt": b"hello"}
        entry = reg.add_entry(manifest_for("mystuff", "dataset", "0.1.0", files), files)
        assert reg.get("mystuff", "dataset").version == "0.1.0"
        on_disk = reg.entry_file_path(entry, "data.txt")
        assert open(on_disk, "rb").read() == b"hello"

    def test_duplicate_conflict(self, reg):
        files = {"a": b"x"}
        m = manifest_for("dup", "dataset", "1.0.0", files)
        reg.add_entry(m, files)
        with pytest.raises(ConflictError):
            reg.add_entry(m, files)

    def test_checksum_mismatch_rejected(self, reg):
        m = manifest_for("bad", "dataset", "1.0.0", {"a": b"x"})
        with pytest.raises(ValidationError):
            reg.add_entry(m, {"a": b"y"})

    def test_undeclared_upload_rejected(self, reg):
        m = manifest_for("bad", "dataset", "1.0.0", {"a": b"x"})
        with pytest.raises(ValidationError):
            reg.add_entry(m, {"a": b"x", "b": b"z"})

    def test_bad_manifest_fields(self, reg):
        with pytest.raises(ValidationError):
            reg.add_entry(manifest_for("UPPER", "dataset", "1.0.0", {}), {})
        with pytest.raises(ValidationError):
            reg.add_entry(manifest_for("x", "gizmo", "1.0.0", {}), {})
        with pytest.raises(ValidationError):
            reg.add_entry(manifest_for("x", "dataset", "", {}), {})
        with pytest.raises(ValidationError):
            reg.add_entry({"name": "x", "kind": "dataset", "version": "1.0.0",
                           "files": [{"path": "../evil", "sha256": "0" * 64}]}, {})
        with pytest.raises(ValidationError):
            reg.add_entry(manifest_for("x", "dataset", "1.0.0", {},
                                       params_schema=[]), {})

    def test_remove_no_tombstone(self, reg):
        files = {"a": b"x"}
        entry = reg.add_entry(manifest_for("gone", "dataset", "1.0.0", files), files)
        entry_dir = os.path.dirname(reg.entry_file_path(entry, "a"))
        reg.remove_entry("gone", "dataset", "1.0.0")
        assert not os.path.exists(entry_dir)
        with pytest.raises(NotFoundError):
            reg.get("gone", "dataset")
        # re-adding after removal succeeds
        reg.add_entry(manifest_for("gone", "dataset", "1.0.0", files), files)

    def test_remove_unknown(self, reg):
        with pytest.raises(NotFoundError):
            reg.remove_entry("nope", "dataset", "1.0.0")

    def test_latest_version_wins(self, reg):
        for v in ("1.0.0", "1.2.0", "1.10.0"):
            files = {"a": v.encode()}
            reg.add_entry(manifest_for("multi", "dataset", v, files), files)
        # lexicographic ordering of version strings decides "latest"
        assert reg.get("multi", "dataset").version == "1.2.0"
        assert reg.get("multi", "dataset", "1.0.0").version == "1.0.0"


class TestVerifyAndRepair:
    def test_flip_one_byte_fails_verify(self, reg):
        entry = reg.get("tiny-spike-gpt", "model")
        path = reg.entry_file_path(entry, "tiny_spike_gpt.sd")
        data = bytearray(open(path, "rb").read())
        rng = random.Random(42)
        i = rng.randrange(len(data))
        original = bytes(data)
        data[i] ^= 0xFF
        open(path, "wb").write(bytes(data))
        result = reg.verify_entry("tiny-spike-gpt", "model", "1.0.0")
        assert not result["passed"]
        assert result["files"][0]["reason"] == "checksum mismatch"
        open(path, "wb").write(original)
        assert reg.verify_entry("tiny-spike-gpt", "model", "1.0.0")["passed"]

    def test_missing_file_reported(self, reg):
        files = {"a": b"x"}
        entry = reg.add_entry(manifest_for("frag", "dataset", "1.0.0", files), files)
        os.remove(reg.entry_file_path(entry, "a"))
        result = reg.verify_entry("frag", "dataset", "1.0.0")
        assert not result["passed"]
        assert result["files"][0]["reason"] == "missing"

    def test_repair_adopts_orphan_manifest(self, reg, tmp_path):
        entry_dir = tmp_path / "registry" / "dataset" / "orphan" / "2.0.0"
        entry_dir.mkdir(parents=True)
        doc = manifest_for("orphan", "dataset", "2.0.0", {})
        (entry_dir / "manifest.json").write_text(json.dumps(doc))
        reg.repair_scan()
        assert reg.get("orphan", "dataset").version == "2.0.0"

    def test_repair_drops_dangling_index_row(self, reg, tmp_path):
        files = {"a": b"x"}
        entry = reg.add_entry(manifest_for("dangle", "dataset", "1.0.0", files), files)
        import shutil
        shutil.rmtree(os.path.dirname(reg.entry_file_path(entry, "a")))
        reg.repair_scan()
        with pytest.raises(NotFoundError):
            reg.get("dangle", "dataset")

    def test_restart_sees_same_entries(self, reg, tmp_path):
        files = {"a": b"x"}
        reg.add_entry(manifest_for("persist", "dataset", "1.0.0", files), files)
        fresh = Registry(tmp_path)
        assert len(fresh.list_entries()) == 11
        assert fresh.get("persist", "dataset").files[0]["sha256"] == sha256_hex(b"x")
