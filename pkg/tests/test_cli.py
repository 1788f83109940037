import json
import sys
from pathlib import Path

import numpy as np
import pytest

from grayplane.cli import main
from grayplane.imagefile import read_pgm, read_watermark, write_pgm, write_watermark
from grayplane.planes import bitget
from grayplane.stego import embed_gray_blind

DATA = Path(__file__).parent / "data"


@pytest.fixture
def files(tmp_path, rng):
    cover = rng.integers(0, 256, (40, 48), dtype=np.uint8)
    mark = (rng.random((40, 48)) < 0.4).astype(np.uint8)
    write_pgm(tmp_path / "cover.pgm", cover)
    write_watermark(tmp_path / "mark.pgm", mark)
    return tmp_path, cover, mark


def run(*args):
    return main([str(a) for a in args])


class TestEmbedExtract:
    @pytest.mark.parametrize("domain,mode", [("gray", "d1"), ("gray", "d2"), ("bit", "d2")])
    def test_non_blind_round_trip(self, files, domain, mode, capsys):
        d, cover, mark = files
        assert run("embed", d / "cover.pgm", d / "mark.pgm", d / "s.pgm", "--plane", 4, "--domain", domain) == 0
        assert "max pixel change" in capsys.readouterr().out
        assert run("extract", d / "out.pgm", "--mode", mode, "--stego", d / "s.pgm",
                   "--cover", d / "cover.pgm", "--plane", 4) == 0
        np.testing.assert_array_equal(read_watermark(d / "out.pgm"), mark)

    def test_gray_plane4_max_change(self, files, capsys):
        d, cover, _ = files
        assert run("embed", d / "cover.pgm", d / "mark.pgm", d / "s.png", "--plane", 4) == 0
        change = int(capsys.readouterr().out.split(":")[1])
        assert change <= 15

    def test_blind_worked_example(self, files):
        d, cover, mark = files
        assert run("embed", d / "cover.pgm", d / "mark.pgm", d / "s.pgm",
                   "--plane", 2, "--blind", "--k", 3) == 0
        s = read_pgm(d / "s.pgm")
        np.testing.assert_array_equal(s, embed_gray_blind(cover, mark, 2, 3))
        assert run("extract", d / "m.pgm", "--mode", "blind", "--stego", d / "s.pgm",
                   "--plane", 2, "--k", 3) == 0
        got = read_watermark(d / "m.pgm")
        np.testing.assert_array_equal(got, mark)
        np.testing.assert_array_equal(got, bitget(s, 2) ^ bitget(s, 4))

    def test_d2_above_plane_is_zero(self, files):
        d, _, _ = files
        run("embed", d / "cover.pgm", d / "mark.pgm", d / "s.pgm", "--plane", 3)
        assert run("extract", d / "m.pgm", "--mode", "d2", "--stego", d / "s.pgm",
                   "--cover", d / "cover.pgm", "--plane", 3, "--t", 5) == 0
        assert not read_watermark(d / "m.pgm").any()

    def test_d1_without_embedding_is_zero(self, files):
        d, _, _ = files
        assert run("extract", d / "m.pgm", "--mode", "d1", "--stego", d / "cover.pgm",
                   "--cover", d / "cover.pgm", "--plane", 4) == 0
        assert not read_watermark(d / "m.pgm").any()

    def test_tile(self, files):
        d, _, _ = files
        args = ("embed", d / "cover.pgm", DATA / "ring32.pgm", d / "s.pgm", "--plane", 4)
        assert run(*args) == 1
        assert not (d / "s.pgm").exists()
        assert run(*args, "--tile") == 0


class TestUsageErrors:
    def test_blind_without_k(self, files, capsys):
        d, _, _ = files
        assert run("embed", d / "cover.pgm", d / "mark.pgm", d / "s.pgm", "--plane", 2, "--blind") == 2
        assert "--k" in capsys.readouterr().err

    def test_blind_bit_domain(self, files):
        d, _, _ = files
        assert run("embed", d / "cover.pgm", d / "mark.pgm", d / "s.pgm", "--plane", 2,
                   "--blind", "--k", 3, "--domain", "bit") == 2

    def test_bad_plane(self, files):
        d, _, _ = files
        assert run("embed", d / "cover.pgm", d / "mark.pgm", d / "s.pgm", "--plane", 9) == 2

    def test_lossy_output_refused(self, files, capsys):
        d, _, _ = files
        assert run("embed", d / "cover.pgm", d / "mark.pgm", d / "s.jpg", "--plane", 2) == 2
        assert "lossless" in capsys.readouterr().err
        assert not (d / "s.jpg").exists()

    def test_missing_cover_for_non_blind(self, files):
        d, _, _ = files
        assert run("extract", d / "m.pgm", "--mode", "d1", "--stego", d / "cover.pgm", "--plane", 2) == 2

    def test_unreadable_input_is_domain_error(self, tmp_path, capsys):
        assert run("embed", tmp_path / "nope.pgm", tmp_path / "nope2.pgm", tmp_path / "s.pgm", "--plane", 2) == 1
        assert "error" in capsys.readouterr().err

    def test_inputs_not_modified(self, files):
        d, _, _ = files
        before = (d / "cover.pgm").read_bytes()
        run("embed", d / "cover.pgm", d / "mark.pgm", d / "s.pgm", "--plane", 4)
        run("compress", d / "cover.pgm", d / "c.pgm", "--quality", 50)
        assert (d / "cover.pgm").read_bytes() == before


class TestOtherCommands:
    def test_compress(self, files):
        d, cover, _ = files
        assert run("compress", d / "cover.pgm", d / "c.pgm", "-q", 60) == 0
        from grayplane.codec import compress

        np.testing.assert_array_equal(read_pgm(d / "c.pgm"), compress(cover, 60))

    def test_compress_external(self, files):
        d, _, _ = files
        cmd = f"{sys.executable} -m grayplane.pil_jpeg {{input}} {{output}} {{quality}}"
        assert run("compress", d / "cover.pgm", d / "c.pgm", "-q", 90, "--external-cmd", cmd) == 0
        assert run("compress", d / "cover.pgm", d / "c.pgm", "-q", 90, "--external-cmd", "nonexistent-x {input}") == 1

    def test_metrics_json(self, files, capsys):
        d, _, _ = files
        assert run("metrics", d / "mark.pgm", d / "mark.pgm", "--json") == 0
        out = json.loads(capsys.readouterr().out)
        assert out == {"euclidean": 0.0, "psnr": "inf", "kl": 0.0}

    def test_decompose(self, files):
        d, cover, _ = files
        assert run("decompose", d / "cover.pgm", d / "planes", "--kind", "gray") == 0
        planes = [read_watermark(d / "planes" / f"G{v}.pgm") for v in range(1, 9)]
        word = sum(p.astype(int) << (v - 1) for v, p in enumerate(planes, start=1))
        np.testing.assert_array_equal(word, cover ^ (cover >> 1))
        assert run("decompose", d / "cover.pgm", d / "bits", "--kind", "bit", "--format", "png") == 0
        assert (d / "bits" / "B8.png").exists()


class TestBench:
    def test_fixture_corpus_deterministic(self, tmp_path, fixture_corpus_dir, capsys):
        for name in ("a", "b"):
            assert run("bench", "--corpus", fixture_corpus_dir, "--out", tmp_path / name,
                       "--no-figures") == 0
        assert (tmp_path / "a" / "rows.csv").read_bytes() == (tmp_path / "b" / "rows.csv").read_bytes()
        out = capsys.readouterr().out
        assert "m_gc_q" in out and "results written" in out

    def test_config_file(self, tmp_path, fixture_corpus_dir):
        cfg = tmp_path / "bench.ini"
        cfg.write_text(
            "[bench]\n"
            f"corpus = {fixture_corpus_dir}\n"
            "planes = 3, 4\n"
            "qualities = 90  ; one quality\n"
            "detectors = m_b, m_g\n"
            "output = out\n"
            "figures = no\n"
        )
        assert run("bench", "--config", cfg) == 0
        rows = (tmp_path / "out" / "rows.csv").read_text().strip().splitlines()
        assert len(rows) == 1 + 3 * 2 * 2
        # flags override the file
        assert run("bench", "--config", cfg, "--planes", "2", "--out", tmp_path / "o2") == 0
        assert (tmp_path / "o2" / "rows.csv").read_text().count("\n") == 1 + 3 * 2

    def test_empty_corpus(self, tmp_path):
        (tmp_path / "empty").mkdir()
        assert run("bench", "--corpus", tmp_path / "empty", "--out", tmp_path / "o") == 1

    def test_missing_corpus_is_usage_error(self, tmp_path):
        assert run("bench", "--out", tmp_path / "o") == 2

    def test_bad_detector_flag(self, tmp_path, fixture_corpus_dir):
        assert run("bench", "--corpus", fixture_corpus_dir, "--detectors", "m_zz") == 2

    def test_q100_run(self, tmp_path, fixture_corpus_dir):
        # measured on the fixture corpus; same 0.10 / 0.25 baselines as the harness
        assert run("bench", "--corpus", fixture_corpus_dir, "--qualities", "100",
                   "--planes", "4", "--out", tmp_path / "o", "--no-figures") == 0
        import csv

        with open(tmp_path / "o" / "means.csv") as fh:
            for m in csv.DictReader(fh):
                limit = 0.25 if m["detector"].startswith("m_gb_t") else 0.10
                assert float(m["euclidean"]) < limit
