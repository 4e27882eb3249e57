"""End-to-end runs of the jtw command-line tool on a planted synthetic corpus."""

import csv
import hashlib
import io
import math
import os
import random
import shutil
import subprocess
from pathlib import Path

import pytest

import jtw

JTW_BIN = os.environ.get("JTW_BIN") or shutil.which("jtw")

pytestmark = pytest.mark.skipif(JTW_BIN is None, reason="jtw executable not found (set JTW_BIN)")

TRAIN_FLAGS = [
    "--latent-dim", "16", "--topics", "3", "--hidden", "32", "--batch-size", "256",
    "--eta0", "0.005", "--max-iter", "12", "--convergence-tol", "0",
]


def run(*args, check=True):
    proc = subprocess.run([JTW_BIN, *map(str, args)], capture_output=True, text=True)
    if check and proc.returncode != 0:
        raise AssertionError(f"jtw {' '.join(map(str, args))} -> {proc.returncode}\n{proc.stderr}")
    return proc


def sha(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def read_csv(path):
    return list(csv.DictReader(io.StringIO(Path(path).read_text())))


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    docs, topics = jtw.generate_synthetic(documents=1500, seed=11, shared_word="patient", shared_topics=[0, 1])
    (d / "corpus.txt").write_text("\n".join(" ".join(doc) for doc in docs) + "\n")
    run("build-vocab", "--corpus", d / "corpus.txt", "--out", d / "vocab.tsv")
    # Seed 4 lands in a split/merge local optimum (one planted topic split in
    # two, two merged); most seeds recover all three topics.
    run("--seed", 1, "train", "--corpus", d / "corpus.txt", "--vocab", d / "vocab.tsv",
        "--out", d / "model.ckpt", "--report", d / "report.csv", *TRAIN_FLAGS)
    return d


def test_build_vocab(trained, tmp_path):
    rows = (trained / "vocab.tsv").read_text().splitlines()
    assert len(rows) == 91  # 3 x 30 planted words + "patient"
    run("build-vocab", "--corpus", trained / "corpus.txt", "--out", tmp_path / "v.tsv", "--vocab-size", 10)
    assert len((tmp_path / "v.tsv").read_text().splitlines()) == 10
    run("build-vocab", "--corpus", trained / "corpus.txt", "--out", tmp_path / "again.tsv")
    assert sha(tmp_path / "again.tsv") == sha(trained / "vocab.tsv")


def test_missing_input_is_an_io_error(tmp_path):
    p = run("build-vocab", "--corpus", tmp_path / "nope.txt", "--out", tmp_path / "v.tsv", check=False)
    assert p.returncode == 2
    assert "nope.txt" in p.stderr


def test_unknown_flag_is_rejected(tmp_path):
    p = run("build-vocab", "--corpus", "x", "--out", "y", "--bogus", check=False)
    assert p.returncode == 1


def test_report_and_resolved_config(trained):
    rows = read_csv(trained / "report.csv")
    assert len(rows) == 12
    for i, r in enumerate(rows):
        assert float(r["lr"]) == 0.005 * 0.95**i
    assert float(rows[-1]["loss"]) < float(rows[0]["loss"])


def test_training_is_reproducible(trained, tmp_path):
    args = ["train", "--corpus", trained / "corpus.txt", "--vocab", trained / "vocab.tsv", *TRAIN_FLAGS]
    args[args.index("12")] = "2"
    run("--seed", 9, *args, "--out", tmp_path / "a.ckpt")
    p = run("--seed", 9, *args, "--out", tmp_path / "b.ckpt")
    assert "train.max-iter=2" in p.stderr
    assert sha(tmp_path / "a.ckpt") == sha(tmp_path / "b.ckpt")
    run("--seed", 10, *args, "--out", tmp_path / "c.ckpt")
    assert sha(tmp_path / "a.ckpt") != sha(tmp_path / "c.ckpt")


def test_config_file_and_flag_precedence(trained, tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text("seed = 9\n[train]\nmax-iter = 1\nhidden = 8\nlatent-dim = 4\ntopics = 2\n")
    base = ["--config", cfg, "train", "--corpus", trained / "corpus.txt", "--vocab", trained / "vocab.tsv"]
    p = run(*base, "--out", tmp_path / "a.ckpt", "--report", tmp_path / "a.csv")
    assert "train.hidden=8" in p.stderr and "seed=9" in p.stderr
    assert len(read_csv(tmp_path / "a.csv")) == 1
    p = run(*base, "--max-iter", 2, "--out", tmp_path / "b.ckpt", "--report", tmp_path / "b.csv")
    assert len(read_csv(tmp_path / "b.csv")) == 2


def test_zero_epochs_and_default_dimension(trained, tmp_path):
    run("train", "--corpus", trained / "corpus.txt", "--vocab", trained / "vocab.tsv",
        "--out", tmp_path / "init.ckpt", "--max-iter", 0, "--hidden", 8, "--topics", 3)
    run("embed", "--checkpoint", tmp_path / "init.ckpt", "--vocab", trained / "vocab.tsv",
        "--corpus", trained / "corpus.txt", "--out", tmp_path / "e.txt")
    assert (tmp_path / "e.txt").read_text().splitlines()[0] == "91 100"


def test_checkpoint_every(trained, tmp_path):
    run("train", "--corpus", trained / "corpus.txt", "--vocab", trained / "vocab.tsv",
        "--out", tmp_path / "m.ckpt", "--max-iter", 2, "--hidden", 8, "--latent-dim", 4,
        "--topics", 2, "--checkpoint-every", 1)
    assert (tmp_path / "m.ckpt").exists()
    assert not [p for p in tmp_path.iterdir() if p.name != "m.ckpt"]  # no temp files left


def test_vocab_mismatch_exit_code(trained, tmp_path):
    other = tmp_path / "other.tsv"
    run("build-vocab", "--corpus", trained / "corpus.txt", "--out", other, "--vocab-size", 20)
    p = run("topics", "--checkpoint", trained / "model.ckpt", "--vocab", other, "--out", tmp_path / "t.tsv",
            check=False)
    assert p.returncode == 4


def test_topics_export(trained, tmp_path):
    run("topics", "--checkpoint", trained / "model.ckpt", "--vocab", trained / "vocab.tsv",
        "--k", 10, "--out", tmp_path / "t.tsv")
    lines = (tmp_path / "t.tsv").read_text().splitlines()
    assert len(lines) == 30
    # Each learned topic's top words come from a single planted topic.
    by_topic = {}
    for line in lines:
        t, _, word, _ = line.split("\t")
        by_topic.setdefault(t, set()).add(word[:2])
    assert all(len(prefixes - {"pa"}) == 1 for prefixes in by_topic.values())


def test_planted_word_has_two_peaks(trained, tmp_path):
    run("word-topics", "--checkpoint", trained / "model.ckpt", "--vocab", trained / "vocab.tsv",
        "--corpus", trained / "corpus.txt", "--words", "patient,t2w0", "--out", tmp_path / "wt.csv")
    rows = {r["label"]: [float(v) for k, v in r.items() if k != "label"] for r in read_csv(tmp_path / "wt.csv")}
    assert sum(1 for m in rows["patient"] if m > 0.3) == 2
    assert max(rows["t2w0"]) > 0.9


def test_sentence_topics(trained, tmp_path):
    (tmp_path / "s.txt").write_text("t0w1 t0w2 t0w3 t0w4\nt1w5, t1w6; the t1w7\n")
    run("sentence-topics", "--checkpoint", trained / "model.ckpt", "--vocab", trained / "vocab.tsv",
        "--sentences", tmp_path / "s.txt", "--out", tmp_path / "st.csv")
    rows = read_csv(tmp_path / "st.csv")
    assert [r["label"] for r in rows] == ["t0w1 t0w2 t0w3 t0w4", "t1w5, t1w6; the t1w7"]
    peaks = [max(range(3), key=lambda t: float(r[f"topic_{t}"])) for r in rows]
    assert peaks[0] != peaks[1]
    for r in rows:
        assert math.isclose(sum(float(r[f"topic_{t}"]) for t in range(3)), 1.0, abs_tol=1e-12)


def test_eval_sim_matches_model_ranking(trained, tmp_path):
    run("embed", "--checkpoint", trained / "model.ckpt", "--vocab", trained / "vocab.tsv",
        "--corpus", trained / "corpus.txt", "--out", tmp_path / "e.txt")
    lines = (tmp_path / "e.txt").read_text().splitlines()
    vecs = {p[0]: [float(v) for v in p[1:]] for p in (l.split() for l in lines[1:])}

    def cos(a, b):
        return sum(x * y for x, y in zip(a, b)) / math.sqrt(sum(x * x for x in a) * sum(y * y for y in b))

    rng = random.Random(5)
    words = sorted(vecs)
    pairs = [tuple(rng.sample(words, 2)) for _ in range(25)]
    # Gold scores are a monotone transform of the model's own cosines, plus
    # one pair with a word the model never saw.
    bench = "".join(f"{a}\t{b}\t{10 * (cos(vecs[a], vecs[b]) + 1):.12f}\n" for a, b in pairs)
    bench += "t0w1\tzebra\t5\n"
    (tmp_path / "fixture.tsv").write_text(bench)
    run("eval-sim", "--checkpoint", trained / "model.ckpt", "--vocab", trained / "vocab.tsv",
        "--corpus", trained / "corpus.txt", "--benchmark", tmp_path / "fixture.tsv", "--out", tmp_path / "r.csv")
    (row,) = read_csv(tmp_path / "r.csv")
    assert row["benchmark"] == "fixture"
    assert float(row["rho"]) == pytest.approx(1.0, abs=1e-12)
    assert (int(row["covered"]), int(row["total"])) == (25, 26)


def test_eval_lexsub_fixture(trained, tmp_path):
    # The gold answer is the target itself, so it is the nearest candidate by construction.
    lines = [
        "t0w1\t2\tt0w3 t0w4 t0w1 t0w5 t0w6\tt1w2,t0w1,t2w3\tt0w1",
        "t1w7\t0\tt1w7 t1w8 t1w9\tt1w7,t0w9\tt1w7",
        "patient\t1\tt0w2 patient t0w8\tpatient,t2w2,zebra\tpatient",
        "zebra\t0\tzebra t0w1\tt0w1\tt0w1",
    ]
    (tmp_path / "lex.tsv").write_text("\n".join(lines) + "\n")
    common = ["--checkpoint", trained / "model.ckpt", "--vocab", trained / "vocab.tsv", "--data", tmp_path / "lex.tsv"]
    run("eval-lexsub", *common, "--out", tmp_path / "c.csv")
    (row,) = read_csv(tmp_path / "c.csv")
    assert float(row["accuracy"]) == 1.0
    assert (int(row["evaluated"]), int(row["excluded"]), int(row["skipped_candidates"])) == (3, 1, 1)

    run("eval-lexsub", *common, "--lexsub-mode", "baladd", "--corpus", trained / "corpus.txt",
        "--out", tmp_path / "b.csv")
    (row,) = read_csv(tmp_path / "b.csv")
    assert row["mode"] == "baladd"
    assert int(row["evaluated"]) == 3


def test_planted_topics_are_more_coherent_than_shuffled(trained, tmp_path):
    vocab = jtw.Vocabulary.from_tsv((trained / "vocab.tsv").read_text())
    model = jtw.Model.load(trained / "model.ckpt", vocab)
    (rows, cols), beta = model.get_param("beta")
    rng = random.Random(0)
    shuffled = []
    for t in range(rows):
        row = beta[t * cols:(t + 1) * cols]
        rng.shuffle(row)
        shuffled += row
    model.set_param("beta", shuffled)
    model.save(tmp_path / "shuffled.ckpt")

    scores = {}
    for name, ckpt in [("planted", trained / "model.ckpt"), ("shuffled", tmp_path / "shuffled.ckpt")]:
        run("eval-coherence", "--checkpoint", ckpt, "--vocab", trained / "vocab.tsv",
            "--corpus", trained / "corpus.txt", "--out", tmp_path / f"{name}.csv")
        scores[name] = float(read_csv(tmp_path / f"{name}.csv")[-1]["coherence"])
    assert scores["planted"] > scores["shuffled"]


def test_outputs_are_reproducible(trained, tmp_path):
    for i in range(2):
        run("embed", "--checkpoint", trained / "model.ckpt", "--vocab", trained / "vocab.tsv",
            "--corpus", trained / "corpus.txt", "--out", tmp_path / f"e{i}.txt")
    assert sha(tmp_path / "e0.txt") == sha(tmp_path / "e1.txt")
    assert (tmp_path / "e0.txt").read_text().endswith("\n")


def test_dense_mode(trained, tmp_path):
    # Pre-trained vectors: one random vector per type.
    vocab = (trained / "vocab.tsv").read_text().splitlines()
    rng = random.Random(2)
    words = [line.split("\t")[0] for line in vocab]
    (tmp_path / "vec.txt").write_text(
        f"{len(words)} 6\n" + "".join(w + " " + " ".join(f"{rng.gauss(0, 1):.6f}" for _ in range(6)) + "\n" for w in words))
    common = ["--corpus", trained / "corpus.txt", "--vocab", trained / "vocab.tsv", "--vectors", tmp_path / "vec.txt"]
    p = run("--mode", "dense", "train", *common, "--out", tmp_path / "d.ckpt", "--report", tmp_path / "d.csv",
            "--max-iter", 2, "--hidden", 16, "--latent-dim", 4, "--topics", 3)
    assert "dense instances" in p.stderr
    run("embed", "--checkpoint", tmp_path / "d.ckpt", *common, "--out", tmp_path / "e.txt")
    assert (tmp_path / "e.txt").read_text().splitlines()[0] == f"{len(words)} 4"
    p = run("--mode", "bow", "embed", "--checkpoint", tmp_path / "d.ckpt", *common, "--out", tmp_path / "x.txt",
            check=False)
    assert p.returncode == 1
    p = run("--mode", "dense", "train", "--corpus", trained / "corpus.txt", "--vocab", trained / "vocab.tsv",
            "--out", tmp_path / "y.ckpt", check=False)
    assert p.returncode == 1
