"""
Tests for experiment configs, the command-line driver and run manifests.
"""

import csv
import json
import os
import sys

import pytest

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from cli import RunManifest, main
from config.experiment import ExperimentConfig
from utils.exceptions import ConfigurationError

ROOT = os.path.dirname(os.path.abspath(__file__))

TINY = """
[run]
name = {name}
seed = 1
train_steps = 20
batch_size = 32
log_every = 10
{teacher}

[task]
name = {task}

[weight]
kind = {weight}
{K}

[network]
hidden = 8, 8
frequencies = 1

[loss]
kind = {loss}

[eval]
steps = 1, 2
samples = 2000
bins = 16
w2_subsample = 64
w2_repeats = 2
teacher_steps = 8
scatter = {scatter}

[style]
count = 200
back_steps = 2
forward_steps = 2
"""

ORACLE = """
[run]
name = oracle-cli
seed = 3

[task]
name = gaussian
mean = 1.5, -0.5
std = 0.7, 1.3

[oracle]
loss_samples = 2048
base_samples = 1024
perturbed_maps = 2
"""


def write_config(tmp_path, filename="run.cfg", name="tiny", task="checkerboard", loss="velocity",
                 weight="uniform-square", K=None, teacher=None, scatter="false") -> str:
    text = TINY.format(
        name=name, task=task, loss=loss, weight=weight, scatter=scatter,
        K="" if K is None else f"K = {K}",
        teacher="" if teacher is None else f"teacher = {teacher}",
    )
    path = tmp_path / filename
    path.write_text(text)
    return str(path)


def read_manifest(out) -> RunManifest:
    return RunManifest.load(os.path.join(str(out), "manifest.json"))


def test_empty_config_gives_defaults():
    config = ExperimentConfig.from_string("")
    assert config.loss.kind == "velocity"
    assert config.task.name == "checkerboard"
    assert config.eval.steps == (1,)


def test_config_serialization_round_trip(tmp_path):
    config = ExperimentConfig.load(write_config(tmp_path, loss="fmm", weight="strip", K=4))
    again = ExperimentConfig.from_string(config.serialize())
    assert again == config
    assert again.config_hash() == config.config_hash()


def test_config_hash_ignores_key_order():
    a = ExperimentConfig.from_string("[run]\nseed = 4\nname = x\n[loss]\nkind = fmm\n")
    b = ExperimentConfig.from_string("[loss]\nkind = fmm\n[run]\nname = x\nseed = 4\n")
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != ExperimentConfig.from_string("[run]\nseed = 5\nname = x\n").config_hash()


@pytest.mark.parametrize("text", [
    "[nonsense]\nx = 1\n",
    "[run]\nspeed = 3\n",
    "[run]\nseed = many\n",
    "[run]\nseed = -1\n",
    "[task]\nname = spiral\n",
    "[loss]\nkind = lmd\n",
    "[style]\ns_prime = 1.0\n",
    "[run\n",
])
def test_bad_configs_are_rejected(text):
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_string(text)


def test_overrides():
    config = ExperimentConfig.from_string("").with_overrides(seed=9, deterministic=True,
                                                             paper_scale=True, output_dir="x")
    assert config.run.seed == 9
    assert config.run.deterministic
    assert config.output_dir == "x"
    assert config.network.hidden == (512,) * 6
    assert config.run.train_steps == 50000


def test_recipes_parse():
    recipes = os.path.join(ROOT, "recipes")
    for name in sorted(os.listdir(recipes)):
        if name.endswith(".cfg"):
            ExperimentConfig.load(os.path.join(recipes, name))


def test_missing_config_exits_with_configuration_code(tmp_path):
    assert main(["train-fmm", "--config", str(tmp_path / "absent.cfg")]) == 2


def test_unknown_command_is_a_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["fly", "--config", "x.cfg"])
    assert info.value.code == 2


def test_wrong_loss_for_command_exits_with_configuration_code(tmp_path):
    out = tmp_path / "out"
    code = main(["train-velocity", "--config", write_config(tmp_path, loss="fmm"), "--out", str(out)])
    assert code == 2
    manifest = read_manifest(out)
    assert manifest.exit_code == 2
    assert "config.cfg" in manifest.files


def test_oracle_suite_without_training(tmp_path):
    cfg = tmp_path / "oracle.cfg"
    cfg.write_text(ORACLE)
    out = tmp_path / "out"
    assert main(["oracle-suite", "--config", str(cfg), "--skip-training", "--out", str(out)]) == 0
    manifest = read_manifest(out)
    assert manifest.command == "oracle-suite"
    assert manifest.exit_code == 0
    assert manifest.metrics["passed"] is True
    assert {"config.cfg", "manifest.json", "oracle-suite.txt", "run.log"} <= set(manifest.files)


def test_oracle_suite_failure_exits_with_acceptance_code(tmp_path):
    cfg = tmp_path / "oracle.cfg"
    cfg.write_text(ORACLE + "direction_sign = -1\n")
    assert main(["oracle-suite", "--config", str(cfg), "--skip-training", "--out", str(tmp_path / "o")]) == 4


def test_velocity_then_distill_then_evaluate(tmp_path):
    out = tmp_path / "velocity"
    assert main(["train-velocity", "--config", write_config(tmp_path), "--out", str(out)]) == 0
    teacher = out / "velocity.ckpt"
    assert teacher.exists()
    manifest = read_manifest(out)
    assert manifest.config_hash == ExperimentConfig.load(str(out / "config.cfg")).config_hash()
    assert {"velocity.ckpt", "velocity.loss.csv"} <= set(manifest.files)

    for mode in ("lmd", "emd"):
        cfg = write_config(tmp_path, f"{mode}.cfg", name=mode, loss=mode, weight="forward-only",
                           teacher=str(teacher))
        student_dir = tmp_path / mode
        assert main(["distill", "--config", cfg, "--out", str(student_dir)]) == 0
        student = student_dir / f"student-{mode}.ckpt"
        assert student.exists()

        eval_dir = tmp_path / f"{mode}-eval"
        assert main(["evaluate", "--config", cfg, "--checkpoint", str(student), "--steps", "1,2",
                     "--out", str(eval_dir)]) == 0
        with open(eval_dir / "metrics.csv") as f:
            rows = list(csv.DictReader(f))
        assert [r["n_steps"] for r in rows] == ["1", "2"]
        assert all(r["teacher_l2"] != "" for r in rows)
        assert (eval_dir / "eval-flowmap-N1.mismatch.csv").exists()


def test_train_fmm_and_sample(tmp_path):
    cfg = write_config(tmp_path, loss="fmm", weight="strip", K=4, scatter="true")
    out = tmp_path / "fmm"
    assert main(["train-fmm", "--config", cfg, "--out", str(out)]) == 0
    with open(out / "fmm.loss.csv") as f:
        header = next(csv.reader(f))
    assert {"lagrangian", "invertibility"} <= set(header)

    samples = tmp_path / "samples"
    assert main(["sample", "--config", cfg, "--checkpoint", str(out / "fmm.ckpt"), "--steps", "4",
                 "--count", "300", "--out", str(samples)]) == 0
    assert (samples / "samples-N4.csv").exists()
    assert (samples / "samples-N4.png").exists()
    assert read_manifest(samples).metrics["files"] == 2


def test_bad_steps_argument(tmp_path):
    cfg = write_config(tmp_path, loss="fmm")
    assert main(["evaluate", "--config", cfg, "--checkpoint", "x.ckpt", "--steps", "1,zero",
                 "--out", str(tmp_path / "e")]) == 2


def test_deterministic_runs_are_identical(tmp_path):
    cfg = write_config(tmp_path, loss="fmm")
    outputs = []
    for run in ("a", "b"):
        out = tmp_path / run
        assert main(["train-fmm", "--config", cfg, "--deterministic", "--out", str(out)]) == 0
        assert main(["evaluate", "--config", cfg, "--deterministic", "--checkpoint", str(out / "fmm.ckpt"),
                     "--out", str(out / "eval")]) == 0
        outputs.append(((out / "fmm.ckpt").read_bytes(), (out / "eval" / "metrics.csv").read_text()))
    assert outputs[0] == outputs[1]


def test_style_transfer_runs_on_conditional_map(tmp_path):
    cfg = write_config(tmp_path, task="checkerboard-2class", loss="fmm", weight="strip", K=4)
    out = tmp_path / "style"
    assert main(["train-fmm", "--config", cfg, "--out", str(out)]) == 0
    assert main(["style-transfer", "--config", cfg, "--checkpoint", str(out / "fmm.ckpt"),
                 "--s-prime", "0.3", "--out", str(out / "transfer")]) == 0
    metrics = read_manifest(out / "transfer").metrics
    assert 0.0 <= metrics["in_target_class"] <= 1.0
    assert (out / "transfer" / "style-0-to-1.summary.txt").exists()


def test_style_transfer_rejects_unconditional_map(tmp_path):
    cfg = write_config(tmp_path, loss="fmm")
    out = tmp_path / "plain"
    assert main(["train-fmm", "--config", cfg, "--out", str(out)]) == 0
    assert main(["style-transfer", "--config", cfg, "--checkpoint", str(out / "fmm.ckpt"),
                 "--out", str(out / "transfer")]) == 2


def test_manifest_json_is_sorted(tmp_path):
    manifest = RunManifest(command="sample", config_hash="abc")
    path = manifest.finish(str(tmp_path), 0)
    with open(path) as f:
        data = json.load(f)
    assert list(data) == sorted(data)
    assert data["files"] == ["manifest.json"]


@pytest.mark.slow
def test_oracle_recipe_with_denoiser_training(tmp_path):
    recipe = os.path.join(ROOT, "recipes", "oracle.cfg")
    assert main(["oracle-suite", "--config", recipe, "--out", str(tmp_path)]) == 0


def test_torn_checkpoint_exits_with_configuration_code(tmp_path):
    cfg = write_config(tmp_path, loss="fmm")
    out = tmp_path / "fmm"
    assert main(["train-fmm", "--config", cfg, "--out", str(out)]) == 0
    ckpt = out / "fmm.ckpt"
    ckpt.write_bytes(ckpt.read_bytes()[:-3])
    assert main(["evaluate", "--config", cfg, "--checkpoint", str(ckpt), "--out", str(tmp_path / "e")]) == 2
