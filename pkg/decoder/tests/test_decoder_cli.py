from pathlib import Path

import numpy as np
from click.testing import CliRunner
from PIL import Image

from sevdecoder.cli import main

from corpus import make_ambiguity_corpus


def test_train_then_reconstruct(tmp_path):
    sem_path, key_dir = make_ambiguity_corpus(tmp_path, k=2, n_pairs=2, map_size=8)
    model_path = tmp_path / "model.pt"
    loss_csv = tmp_path / "loss.csv"
    runner = CliRunner()

    result = runner.invoke(
        main,
        [
            "train", str(sem_path), str(key_dir), str(model_path),
            "--resolution", "32", "--epochs", "5", "--seed", "3",
            "--loss-csv", str(loss_csv),
        ],
    )
    assert result.exit_code == 0, result.output
    assert "trained on 2 pairs" in result.output
    assert model_path.exists()
    assert loss_csv.read_text().startswith("step,")

    out_dir = tmp_path / "recon"
    result = runner.invoke(
        main,
        [
            "reconstruct", str(model_path), str(sem_path), str(out_dir),
            "--width", "40", "--height", "24",
        ],
    )
    assert result.exit_code == 0, result.output
    assert "wrote 2 frames" in result.output
    pngs = sorted(Path(out_dir).glob("*.png"))
    assert len(pngs) == 2
    img = np.asarray(Image.open(pngs[0]))
    assert img.shape == (24, 40, 3)


def test_reconstruct_refuses_mismatched_sem(tmp_path):
    sem_path, key_dir = make_ambiguity_corpus(tmp_path, k=2, n_pairs=2, map_size=8)
    model_path = tmp_path / "model.pt"
    runner = CliRunner()
    result = runner.invoke(
        main,
        ["train", str(sem_path), str(key_dir), str(model_path),
         "--resolution", "32", "--epochs", "2"],
    )
    assert result.exit_code == 0, result.output

    other_sem, _ = make_ambiguity_corpus(tmp_path / "other", k=4, n_pairs=4, map_size=8)
    result = runner.invoke(
        main,
        ["reconstruct", str(model_path), str(other_sem), str(tmp_path / "out"),
         "--width", "32", "--height", "32"],
    )
    assert result.exit_code != 0
