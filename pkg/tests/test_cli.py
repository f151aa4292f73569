"""CLI subcommands: validation, reproducibility, output schemas."""

import json
import os
import shutil

import pytest

from metabalance.cli import main
from metabalance.data import _path as data_path


@pytest.fixture
def data_files(tmp_path):
    files = {}
    for name in ("pool.json", "deck_hunter.json", "deck_paladin.json",
                 "deck_warlock.json", "agents.json"):
        dst = tmp_path / name
        shutil.copy(data_path(name), dst)
        files[name] = str(dst)
    return files


def run(argv):
    return main(argv)


def test_validate_ok(data_files, capsys):
    rc = run(["validate", "--pool", data_files["pool.json"],
              "--decks", data_files["deck_hunter.json"],
              data_files["deck_paladin.json"]])
    assert rc == 0
    out = capsys.readouterr().out
    assert "ok" in out


def test_validate_rejects_short_deck(data_files, tmp_path, capsys):
    deck = json.loads(open(data_files["deck_hunter.json"]).read())
    deck["cards"] = deck["cards"][:29]
    bad = tmp_path / "bad_deck.json"
    bad.write_text(json.dumps(deck))
    rc = run(["validate", "--pool", data_files["pool.json"], "--decks", str(bad)])
    assert rc != 0
    assert "30" in capsys.readouterr().err


def test_validate_rejects_unknown_pool_file(tmp_path, capsys):
    rc = run(["validate", "--pool", str(tmp_path / "missing.json")])
    assert rc != 0


def test_simulate_is_byte_reproducible(data_files, tmp_path):
    args = ["simulate", "--pool", data_files["pool.json"],
            "--decks", data_files["deck_hunter.json"],
            data_files["deck_paladin.json"], data_files["deck_warlock.json"],
            "--agents", "aggro,control,control",
            "--games", "12", "--seed", "9"]
    out1 = tmp_path / "run1"
    out2 = tmp_path / "run2"
    assert run(args + ["--out", str(out1)]) == 0
    assert run(args + ["--out", str(out2), "--jobs", "2"]) == 0
    for name in ("matrix.csv", "telemetry.json", "manifest.json"):
        b1 = (out1 / name).read_bytes()
        b2 = (out2 / name).read_bytes()
        if name == "manifest.json":
            # manifests differ only in the flags that name the run
            m1 = json.loads(b1)
            m2 = json.loads(b2)
            assert m1["versions"] == m2["versions"]
        else:
            assert b1 == b2, name


def test_simulate_matrix_shape(data_files, tmp_path):
    out = tmp_path / "sim"
    rc = run(["simulate", "--pool", data_files["pool.json"],
              "--decks", data_files["deck_hunter.json"], data_files["deck_paladin.json"],
              "--agents", "aggro,control",
              "--games", "8", "--seed", "3", "--out", str(out)])
    assert rc == 0
    lines = (out / "matrix.csv").read_text().strip().splitlines()
    assert lines[0].startswith("deck,")
    assert lines[0].endswith(",meta")
    assert len(lines) == 3
    telemetry = json.loads((out / "telemetry.json").read_text())
    assert set(telemetry) == {"hunter_aggro", "paladin_control"}


def test_agents_file_accepted(data_files, tmp_path):
    out = tmp_path / "sim2"
    rc = run(["simulate", "--pool", data_files["pool.json"],
              "--decks", data_files["deck_hunter.json"],
              data_files["deck_paladin.json"], data_files["deck_warlock.json"],
              "--agents", data_files["agents.json"],
              "--games", "4", "--seed", "3", "--out", str(out)])
    assert rc == 0


def test_agent_deck_count_mismatch_fails(data_files, tmp_path, capsys):
    rc = run(["simulate", "--pool", data_files["pool.json"],
              "--decks", data_files["deck_hunter.json"], data_files["deck_paladin.json"],
              "--agents", "aggro", "--games", "4", "--out", str(tmp_path / "x")])
    assert rc != 0


def test_evolve_single_emits_rows_and_best_patch(data_files, tmp_path):
    out = tmp_path / "ga"
    rc = run(["evolve-single", "--pool", data_files["pool.json"],
              "--decks", data_files["deck_hunter.json"],
              data_files["deck_paladin.json"], data_files["deck_warlock.json"],
              "--agents", "aggro,control,control",
              "--games", "4", "--generations", "3", "--population", "6",
              "--seed", "2", "--out", str(out)])
    assert rc == 0
    lines = (out / "generations.csv").read_text().strip().splitlines()
    assert lines[0] == "generation,min_F,avg_F,max_F,best_M"
    assert len(lines) == 4
    best = json.loads((out / "best_patch.json").read_text())
    assert {"pool_hash", "genes", "F", "M"} <= set(best)
    # the emitted patch file loads back against the pool it came from
    rc = run(["validate", "--pool", data_files["pool.json"],
              "--patch", str(out / "best_patch.json")])
    assert rc == 0


def test_evolve_pareto_emits_archive(data_files, tmp_path):
    out = tmp_path / "mo"
    rc = run(["evolve-pareto", "--pool", data_files["pool.json"],
              "--decks", data_files["deck_hunter.json"],
              data_files["deck_paladin.json"], data_files["deck_warlock.json"],
              "--agents", "aggro,control,control",
              "--games", "4", "--generations", "2", "--population", "6",
              "--seed", "2", "--out", str(out)])
    assert rc == 0
    lines = (out / "archive.csv").read_text().strip().splitlines()
    assert lines[0] == "individual_id,generation,F,M,on_front,seeded"
    assert len(lines) == 1 + 6 + 2 * 6
    front = json.loads((out / "front_patches.json").read_text())
    assert front["front"]
    assert any(p["M"] == 0 for p in front["front"])


def test_nerf_sweep_emits_impact(data_files, tmp_path):
    out = tmp_path / "sweep"
    rc = run(["nerf-sweep", "--pool", data_files["pool.json"],
              "--decks", data_files["deck_hunter.json"], data_files["deck_warlock.json"],
              "--agents", "aggro,control",
              "--target-deck", data_files["deck_paladin.json"],
              "--target-agent", "control",
              "--games", "8", "--seed", "4", "--out", str(out)])
    assert rc == 0
    lines = (out / "impact.csv").read_text().strip().splitlines()
    assert lines[0] == "card_id,wrd,wrp,wrn,baseline,delta,noop_nerf"
    assert len(lines) == 16


def test_apply_patch_writes_patched_pool(data_files, tmp_path):
    from metabalance.cards import PatchVector, chromosome_layout, load_pool, save_patch

    pool = load_pool(data_files["pool.json"])
    genes = [0] * len(chromosome_layout(pool))
    genes[0] = 2
    patch_file = tmp_path / "patch.json"
    save_patch(PatchVector(genes=tuple(genes)), pool, patch_file)
    out = tmp_path / "patched"
    rc = run(["apply-patch", "--pool", data_files["pool.json"],
              "--patch", str(patch_file), "--out", str(out)])
    assert rc == 0
    patched = load_pool(out / "patched_cards.json")
    assert patched.cards[0].cost == pool.cards[0].cost + 2


def test_inputs_never_mutated(data_files, tmp_path):
    before = {k: open(v, "rb").read() for k, v in data_files.items()}
    run(["simulate", "--pool", data_files["pool.json"],
         "--decks", data_files["deck_hunter.json"], data_files["deck_paladin.json"],
         "--agents", "aggro,control", "--games", "4", "--seed", "1",
         "--out", str(tmp_path / "o")])
    after = {k: open(v, "rb").read() for k, v in data_files.items()}
    assert before == after


def test_env_var_overrides(data_files, tmp_path, monkeypatch):
    monkeypatch.setenv("METABALANCE_POOL", data_files["pool.json"])
    monkeypatch.setenv("METABALANCE_DECKS", ":".join(
        [data_files["deck_hunter.json"], data_files["deck_paladin.json"]]))
    monkeypatch.setenv("METABALANCE_AGENTS", "aggro,control")
    monkeypatch.setenv("METABALANCE_GAMES", "4")
    monkeypatch.setenv("METABALANCE_OUT", str(tmp_path / "envout"))
    rc = run(["simulate", "--seed", "5"])
    assert rc == 0
    assert (tmp_path / "envout" / "matrix.csv").exists()
