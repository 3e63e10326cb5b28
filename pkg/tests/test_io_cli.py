import json

import numpy as np
import pytest

from islandstrat import cli, experiment
from islandstrat.exceptions import DataError
from islandstrat.io import (
    read_genomes,
    read_pedigree,
    read_phylogeny,
    write_genomes,
    write_phylogeny,
)
from islandstrat.mesh import MeshConfig

from conftest import small_config
from trees import CHERRY, FIXTURES


def test_phylogeny_csv_roundtrip(tmp_path):
    for t, _ in FIXTURES.values():
        write_phylogeny(tmp_path / "p.csv", t)
        assert read_phylogeny(tmp_path / "p.csv") == t
    text = (tmp_path / "p.csv").read_text()
    assert text.splitlines()[0] == "id,ancestor_list,origin_time,taxon_label"
    assert "[none]" in text


def test_genome_rows_roundtrip(tmp_path):
    config = small_config()
    sim, _ = experiment.simulate(config)
    rows = experiment.sample_rows(sim, 2, config.seed)
    write_genomes(tmp_path / "g.csv", rows)
    back = read_genomes(tmp_path / "g.csv")
    assert back == rows
    for r in back:
        ann = r.annotation(config.surface)
        assert ann.depth == r.depth
        assert r.alleles(config.surface) == ann.alleles()


@pytest.mark.parametrize(
    "text",
    ["", "wrong,header\n", "id,ancestor_list,origin_time,taxon_label\n0,none,0,\n"],
)
def test_bad_phylogeny_files(tmp_path, text):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(DataError):
        read_phylogeny(p)


def test_cli_pipeline(tmp_path, config_file, capsys):
    cfg = config_file(small_config(exact_tracking=True))
    out = tmp_path / "run"
    assert cli.main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    summary = json.loads((out / "run_summary.json").read_text())
    assert summary["pe_generations"] == 6 * 20
    assert len(read_genomes(out / "genomes.csv")) == 6 * 8
    assert len(read_pedigree(out / "pedigree.csv")) == 6 * 20 * 8

    phylo = tmp_path / "phylo.csv"
    nwk = tmp_path / "tree.nwk"
    assert cli.main(["reconstruct", str(out / "genomes.csv"), "--out", str(phylo),
                     "--newick", str(nwk), "--subsample", "12"]) == 0
    table = read_phylogeny(phylo)
    assert len(table.leaf_labels()) == 12
    assert nwk.read_text().strip().endswith(";")

    m = tmp_path / "m.json"
    assert cli.main(["metrics", str(phylo), "--out", str(m)]) == 0
    report = json.loads(m.read_text())
    assert report["leaf_count"] == 12 and report["input_digest"].startswith("sha256:")


def test_single_pe_run_exports_whole_population(tmp_path, config_file):
    cfg = config_file(small_config(mesh=MeshConfig(1, 1, halt_generations=10), seed=1))
    out = tmp_path / "one"
    assert cli.main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    assert len(read_genomes(out / "genomes.csv")) == 8


def test_metrics_cli_on_cherry(tmp_path):
    p = tmp_path / "cherry.csv"
    write_phylogeny(p, CHERRY)
    assert cli.main(["metrics", str(p), "--out", str(tmp_path / "a.json")]) == 0
    assert cli.main(["metrics", str(p), "--out", str(tmp_path / "b.json")]) == 0
    a = json.loads((tmp_path / "a.json").read_text())
    assert a["sum_branch_length"] == 4 and a["mean_pairwise_distance"] == 4
    assert (tmp_path / "a.json").read_text() == (tmp_path / "b.json").read_text()


def test_compare_cli(tmp_path):
    for side, values in (("a", [10, 11, 12, 13, 14]), ("b", [1, 2, 3, 4, 5])):
        d = tmp_path / side
        d.mkdir()
        for i, v in enumerate(values):
            (d / f"r{i}.json").write_text(json.dumps({"sum_branch_length": v}))
    out = tmp_path / "cmp.json"
    rc = cli.main(["compare", str(tmp_path / "a"), str(tmp_path / "b"),
                   "--metric", "sum_branch_length", "--out", str(out)])
    assert rc == 0
    result = json.loads(out.read_text())
    assert result["p_value"] < 0.05 and result["direction"] == "A>B"


def test_surface_check_cli(capsys):
    assert cli.main(["surface-check", "--max-time", "1024"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines and all(l.startswith("PASS") for l in lines)


def test_bench_cli(tmp_path, config_file):
    out = tmp_path / "bench.json"
    assert cli.main(["bench", "--config", str(config_file()), "--out", str(out)]) == 0
    result = json.loads(out.read_text())
    assert result["pe_generations_per_second"] > 0


def test_exit_codes(tmp_path, config_file):
    assert cli.main(["run", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"seed": 1, "mesh": {"width": 0}}))
    assert cli.main(["run", "--config", str(bad), "--out", str(tmp_path / "x")]) == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 1

    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert cli.main(["metrics", str(empty), "--out", str(tmp_path / "m.json")]) == 2
    d = tmp_path / "few"
    d.mkdir()
    assert cli.main(["compare", str(d), str(d), "--metric", "sum_branch_length",
                     "--out", str(tmp_path / "c.json")]) == 2
    assert cli.main(["compare", str(d), str(d), "--metric", "nope",
                     "--out", str(tmp_path / "c.json")]) == 1
    g = tmp_path / "g.csv"
    g.write_text("pe_x,pe_y,slot,fitness,depth,annotation_hex,lineage_id\n0,0,0,0.0,1,zz,0\n")
    assert cli.main(["reconstruct", str(g), "--config", str(config_file()),
                     "--out", str(tmp_path / "p.csv")]) == 2


def test_subsample_larger_than_sample_is_usage_error(tmp_path, config_file):
    cfg = config_file()
    out = tmp_path / "run"
    cli.main(["run", "--config", str(cfg), "--out", str(out)])
    rc = cli.main(["reconstruct", str(out / "genomes.csv"), "--subsample", "999",
                   "--out", str(tmp_path / "p.csv")])
    assert rc == 1
