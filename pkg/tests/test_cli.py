import json
from pathlib import Path

import click
import pytest
from click.testing import CliRunner

from sentepi.cli import _parse_grid, load_config, main
from sentepi.synthetic import write_pipeline_fixture


class TestConfigParsing:
    def test_grid_comma_form(self):
        assert _parse_grid("0, 0.075, 0.145") == (0.0, 0.075, 0.145)

    def test_grid_range_form_full_scale(self):
        grid = _parse_grid("0:0.145:0.005")
        assert len(grid) == 30
        assert grid[0] == 0.0
        assert grid[-1] == 0.145

    def test_grid_bad_forms_rejected(self):
        with pytest.raises(click.UsageError):
            _parse_grid("0:0.1:0")
        with pytest.raises(click.UsageError):
            _parse_grid("a,b")

    def test_hash_ignores_output_directory(self, tmp_path):
        config = tmp_path / "c.conf"
        config.write_text("seed = 5\n")
        a = load_config(config, {"out": Path("one")})
        b = load_config(config, {"out": Path("two")})
        assert a.config_hash() == b.config_hash()

    def test_hash_tracks_semantic_keys(self, tmp_path):
        config = tmp_path / "c.conf"
        config.write_text("seed = 5\n")
        a = load_config(config, {})
        b = load_config(config, {"seed": 6})
        assert a.config_hash() != b.config_hash()

    def test_comments_and_blank_lines_allowed(self, tmp_path):
        config = tmp_path / "c.conf"
        config.write_text("# comment\n\nseed = 5  # trailing\ncoverage = 0.5\n")
        loaded = load_config(config, {})
        assert loaded.seed == 5
        assert loaded.coverage == 0.5


@pytest.fixture(scope="module")
def pipeline_dir(tmp_path_factory):
    """Fixture inputs plus a config file shared by the command tests."""
    root = tmp_path_factory.mktemp("pipeline")
    data = root / "data"
    paths = write_pipeline_fixture(data, seed=2009, n_users=80, n_tweets=900)
    config = root / "run.conf"
    config.write_text(
        "\n".join(
            [
                "seed = 424242",
                f"out = {root / 'out'}",
                f"tweets = {paths['tweets']}",
                f"labels = {paths['labels']}",
                f"followers = {paths['followers']}",
                f"friends = {paths['friends']}",
                f"coverage_table = {paths['coverage']}",
                "test_split = 0.2",
                "bootstrap_iterations = 150",
                "in_fraction_iterations = 20",
                "maxent_max_iter = 150",
                "r_grid = 0,0.1",
                "runs_per_r = 25",
                "coverage = 0.6",
                "net_nodes = 120",
                "net_groups = 3",
                "net_p_intra = 0.2",
                "net_p_inter = 0.02",
                "net_weight_min = 90",
                "net_weight_max = 150",
                "",
            ]
        )
    )
    return {"root": root, "config": config, "out": root / "out"}


def _run(args):
    return CliRunner().invoke(main, args, catch_exceptions=False)


@pytest.mark.usefixtures("pipeline_dir")
class TestPipelineCommands:
    def test_01_train(self, pipeline_dir):
        result = _run(["train", "--config", str(pipeline_dir["config"])])
        assert result.exit_code == 0, result.output
        assert (pipeline_dir["out"] / "ensemble_model.json").exists()
        assert "held-out accuracy" in result.output
        assert (pipeline_dir["out"] / "manifest_train.json").exists()

    def test_02_classify(self, pipeline_dir):
        result = _run(["classify", "--config", str(pipeline_dir["config"])])
        assert result.exit_code == 0, result.output
        predictions = (pipeline_dir["out"] / "predictions.csv").read_text()
        assert predictions.startswith("tweet_id,label,source")
        assert ",predicted" in predictions
        assert ",manual" in predictions

    def test_03_timeseries(self, pipeline_dir):
        result = _run(["timeseries", "--config", str(pipeline_dir["config"])])
        assert result.exit_code == 0, result.output
        out = pipeline_dir["out"]
        for name in ("daily_counts.csv", "moving_avg.csv", "region_scores.csv"):
            assert (out / name).exists()
        corr = json.loads((out / "regional_correlation.json").read_text())
        assert corr["weighted_r"] > 0.3  # coverage tracks regional sentiment

    def test_04_flownet(self, pipeline_dir):
        result = _run(["flownet", "--config", str(pipeline_dir["config"])])
        assert result.exit_code == 0, result.output
        nodes = (pipeline_dir["out"] / "opinion_nodes.csv").read_text().splitlines()
        assert nodes[0] == "id,n_pos,n_neg,n_neu,sign"
        assert len(nodes) > 10

    def test_05_homophily(self, pipeline_dir):
        result = _run(["homophily", "--config", str(pipeline_dir["config"])])
        assert result.exit_code == 0, result.output
        out = pipeline_dir["out"]
        summary = json.loads((out / "homophily.json").read_text())
        # the fixture plants lean-homophilous follow edges
        assert summary["assortativity_r"] > summary["null_max"]
        nulls = (out / "null_distribution.csv").read_text().splitlines()
        assert len(nulls) == 151

    def test_06_gen_net(self, pipeline_dir):
        result = _run(["gen-net", "--config", str(pipeline_dir["config"])])
        assert result.exit_code == 0, result.output
        net = (pipeline_dir["out"] / "contact_network.csv").read_text().splitlines()
        assert net[0] == "u,v,w"

    def test_07_sweep(self, pipeline_dir):
        result = _run(["sweep", "--config", str(pipeline_dir["config"])])
        assert result.exit_code == 0, result.output
        report = (pipeline_dir["out"] / "sweep_report.csv").read_text().splitlines()
        assert report[0].startswith("target_r,achieved_r_mean,runs,")
        assert len(report) == 3


class TestErrorHandling:
    def test_missing_config_is_usage_error(self, tmp_path):
        result = _run(["train", "--config", str(tmp_path / "nope.conf")])
        assert result.exit_code == 2

    def test_missing_seed_is_usage_error(self, tmp_path):
        config = tmp_path / "c.conf"
        config.write_text("out = somewhere\n")
        result = _run(["train", "--config", str(config)])
        assert result.exit_code == 2
        assert "seed" in result.output

    def test_missing_label_file_is_usage_error(self, tmp_path):
        data = write_pipeline_fixture(tmp_path / "d", seed=7, n_users=10, n_tweets=40)
        config = tmp_path / "c.conf"
        config.write_text(
            f"seed = 1\nout = {tmp_path / 'o'}\ntweets = {data['tweets']}\n"
            f"labels = {tmp_path / 'missing.csv'}\n"
        )
        result = _run(["train", "--config", str(config)])
        assert result.exit_code == 2
        assert "not found" in result.output

    def test_unknown_config_key_rejected(self, tmp_path):
        config = tmp_path / "c.conf"
        config.write_text("seed = 1\nbogus_key = 2\n")
        result = _run(["train", "--config", str(config)])
        assert result.exit_code == 2
        assert "bogus_key" in result.output

    def test_corrupt_model_is_runtime_failure(self, tmp_path):
        data = write_pipeline_fixture(tmp_path / "d", seed=6, n_users=20, n_tweets=80)
        out = tmp_path / "o"
        out.mkdir()
        config = tmp_path / "c.conf"
        config.write_text(
            f"seed = 1\nout = {out}\ntweets = {data['tweets']}\n"
            f"labels = {data['labels']}\ntest_split = 0\nmaxent_max_iter = 60\n"
        )
        assert _run(["train", "--config", str(config)]).exit_code == 0
        model_path = out / "ensemble_model.json"
        payload = json.loads(model_path.read_text())
        payload["format_version"] = 99
        model_path.write_text(json.dumps(payload))
        result = _run(["classify", "--config", str(config)])
        assert result.exit_code == 1
        assert "version" in result.output

    def test_stale_upstream_refused_without_force(self, tmp_path):
        data = write_pipeline_fixture(tmp_path / "d", seed=8, n_users=30, n_tweets=200)
        out = tmp_path / "o"
        base = (
            f"out = {out}\ntweets = {data['tweets']}\nlabels = {data['labels']}\n"
            "test_split = 0\nmaxent_max_iter = 60\n"
        )
        config = tmp_path / "c.conf"
        config.write_text("seed = 1\n" + base)
        assert _run(["train", "--config", str(config)]).exit_code == 0

        # classifying under a different seed must refuse...
        config.write_text("seed = 2\n" + base)
        stale = _run(["classify", "--config", str(config)])
        assert stale.exit_code == 2
        assert "stale" in stale.output
        # ...unless forced
        forced = _run(["classify", "--config", str(config), "--force"])
        assert forced.exit_code == 0, forced.output


class TestSeedOverride:
    def test_flag_overrides_file(self, tmp_path):
        data = write_pipeline_fixture(tmp_path / "d", seed=9, n_users=30, n_tweets=200)
        out = tmp_path / "o"
        config = tmp_path / "c.conf"
        config.write_text(
            f"seed = 1\nout = {out}\ntweets = {data['tweets']}\n"
            f"labels = {data['labels']}\ntest_split = 0\nmaxent_max_iter = 60\n"
        )
        assert _run(["train", "--config", str(config), "--seed", "77"]).exit_code == 0
        manifest = json.loads((out / "manifest_train.json").read_text())
        assert manifest["seed"] == 77
