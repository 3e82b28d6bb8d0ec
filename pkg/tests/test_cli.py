import json

import pytest
import yaml

from cotrain.main import main
from cotrain.trajectory.storage import load_dataset
from cotrain.trajectory.types import SourceTag


def _world_file(path, **entry):
    path.write_text(yaml.safe_dump(entry), encoding="utf-8")
    return str(path)


@pytest.fixture(scope="module")
def demo_dirs(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    real, dc = root / "real", root / "dc"
    assert main(["toyworld", "collect", "--config", "real_cup_pnp", "--n", "2", "--seed", "3", "--out", str(real)]) == 0
    assert main(["toyworld", "collect", "--config", "dc_cup_pnp", "--n", "2", "--seed", "3", "--out", str(dc)]) == 0
    return real, dc


def test_collect_reads_a_world_file(tmp_path):
    world = _world_file(tmp_path / "world.yaml", preset="real_cup_pnp", episode_horizon=100)
    out = tmp_path / "demos"
    assert main(["toyworld", "collect", "--config", world, "--n", "1", "--seed", "3", "--out", str(out)]) == 0
    assert load_dataset(out).world_spec["episode_horizon"] == 100


def test_world_flag_is_an_alias(tmp_path, demo_dirs):
    out = tmp_path / "alias"
    assert main(["toyworld", "collect", "--world", "real_cup_pnp", "--n", "2", "--seed", "3", "--out", str(out)]) == 0
    assert load_dataset(out).trajectories == load_dataset(demo_dirs[0]).trajectories


def test_missing_world_file_is_a_usage_error(tmp_path):
    out = tmp_path / "never"
    assert main(["toyworld", "collect", "--config", str(tmp_path / "nope.yaml"), "--n", "1", "--out", str(out)]) == 2


def test_generate_takes_the_target_world_from_config(tmp_path, demo_dirs):
    world = _world_file(tmp_path / "dc.yaml", preset="dc_cup_pnp")
    out, report = tmp_path / "generated", tmp_path / "report.json"
    argv = ["mimicgen", "generate", "--sources", str(demo_dirs[1]), "--config", world,
            "--n", "2", "--seed", "5", "--threads", "1", "--out", str(out), "--report", str(report)]
    assert main(argv) == 0
    generated = load_dataset(out)
    assert len(generated) == 2
    assert generated.source == SourceTag.DIGITAL_COUSIN
    assert json.loads(report.read_text(encoding="utf-8"))["successes"] == 2


def test_diff_writes_text_and_json(tmp_path, demo_dirs, capsys):
    out = tmp_path / "reports" / "real_vs_dc.txt"
    assert main(["compose", "diff", "--a", str(demo_dirs[0]), "--b", str(demo_dirs[1]), "--out", str(out)]) == 0
    text = out.read_text(encoding="utf-8")
    assert "init region IoU" in text
    assert text.strip() in capsys.readouterr().out
    doc = json.loads(out.with_suffix(".json").read_text(encoding="utf-8"))
    assert doc["init_region_iou"] == pytest.approx(1.0)
    assert doc["texture_overlap"] == {"shared": 0, "a_only": 1, "b_only": 1}


def test_diff_out_may_name_the_json_file(tmp_path, demo_dirs):
    out = tmp_path / "delta.json"
    assert main(["compose", "diff", "--a", str(demo_dirs[0]), "--b", str(demo_dirs[0]), "--out", str(out)]) == 0
    assert json.loads(out.read_text(encoding="utf-8"))["camera_translation_delta_m"] == 0.0
    assert (tmp_path / "delta.txt").is_file()
