import io

import numpy as np
import pytest

from hpss import Signal, read_wav, write_wav
from hpss.cli import EXIT_BAD_ARGS, EXIT_IO, EXIT_OK, main
from hpss.phase import read_if_dump
from hpss.stft import read_spec_dump
from hpss.synth import bench_track


@pytest.fixture(scope="module")
def wav_dir(tmp_path_factory):
    base = tmp_path_factory.mktemp("cliwav")
    track = bench_track(np.random.default_rng(0), sample_rate=8000, duration=1.0)
    write_wav(base / "mix.wav", track.mixture, "float32")
    write_wav(base / "ref_h.wav", track.harmonic, "float32")
    write_wav(base / "ref_p.wav", track.percussive, "float32")
    return base


def run_cli(args):
    out = io.StringIO()
    code = main(args, out=out)
    return code, out.getvalue()


SEP_FLAGS = ["--win", "256", "--hop", "64", "--iters", "10"]


class TestSeparate:
    def test_outputs_sum_to_input(self, wav_dir, tmp_path):
        out_h = tmp_path / "h.wav"
        out_p = tmp_path / "p.wav"
        code, _ = run_cli(
            ["separate", str(wav_dir / "mix.wav"), "--out-h", str(out_h),
             "--out-p", str(out_p)] + SEP_FLAGS
        )
        assert code == EXIT_OK
        mix = read_wav(wav_dir / "mix.wav").samples
        total = read_wav(out_h).samples + read_wav(out_p).samples
        assert np.max(np.abs(mix - total)) <= 2.0**-22  # float32 rounding

    def test_mf_method(self, wav_dir, tmp_path):
        code, _ = run_cli(
            ["separate", str(wav_dir / "mix.wav"),
             "--out-h", str(tmp_path / "h.wav"), "--out-p", str(tmp_path / "p.wav"),
             "--method", "mf"] + SEP_FLAGS
        )
        assert code == EXIT_OK

    def test_zero_iters_equals_mf_init(self, wav_dir, tmp_path):
        args = ["separate", str(wav_dir / "mix.wav"), "--win", "256", "--hop", "64"]
        code, _ = run_cli(
            args + ["--iters", "0",
                    "--out-h", str(tmp_path / "h0.wav"),
                    "--out-p", str(tmp_path / "p0.wav")]
        )
        assert code == EXIT_OK
        code, _ = run_cli(
            args + ["--method", "mf",
                    "--out-h", str(tmp_path / "hm.wav"),
                    "--out-p", str(tmp_path / "pm.wav")]
        )
        assert code == EXIT_OK
        a = read_wav(tmp_path / "h0.wav").samples
        b = read_wav(tmp_path / "hm.wav").samples
        assert np.max(np.abs(a - b)) <= 1e-6

    def test_oracle_if_source(self, wav_dir, tmp_path):
        code, _ = run_cli(
            ["separate", str(wav_dir / "mix.wav"),
             "--out-h", str(tmp_path / "h.wav"), "--out-p", str(tmp_path / "p.wav"),
             "--if-source", f"oracle:{wav_dir / 'ref_h.wav'}"] + SEP_FLAGS
        )
        assert code == EXIT_OK

    def test_trace_output(self, wav_dir, tmp_path):
        trace = tmp_path / "trace.csv"
        code, _ = run_cli(
            ["separate", str(wav_dir / "mix.wav"),
             "--out-h", str(tmp_path / "h.wav"), "--out-p", str(tmp_path / "p.wav"),
             "--trace", str(trace)] + SEP_FLAGS
        )
        assert code == EXIT_OK
        lines = trace.read_text().strip().splitlines()
        assert len(lines) == 11  # header + 10 iterations

    def test_config_file_overrides_flags(self, wav_dir, tmp_path):
        cfg = tmp_path / "hpss.cfg"
        cfg.write_text("iters = 3\nwin_len = 256\nhop = 64\n")
        trace = tmp_path / "trace.csv"
        code, _ = run_cli(
            ["separate", str(wav_dir / "mix.wav"),
             "--out-h", str(tmp_path / "h.wav"), "--out-p", str(tmp_path / "p.wav"),
             "--iters", "50", "--config", str(cfg), "--trace", str(trace)]
        )
        assert code == EXIT_OK
        assert len(trace.read_text().strip().splitlines()) == 4  # config wins

    def test_missing_input_gives_io_exit(self, tmp_path):
        code, _ = run_cli(
            ["separate", str(tmp_path / "missing.wav"),
             "--out-h", str(tmp_path / "h.wav"), "--out-p", str(tmp_path / "p.wav")]
        )
        assert code == EXIT_IO

    def test_bad_if_source_gives_args_exit(self, wav_dir, tmp_path):
        code, _ = run_cli(
            ["separate", str(wav_dir / "mix.wav"),
             "--out-h", str(tmp_path / "h.wav"), "--out-p", str(tmp_path / "p.wav"),
             "--if-source", "telepathy"]
        )
        assert code == EXIT_BAD_ARGS


class TestEval:
    def test_perfect_estimates(self, wav_dir):
        code, out = run_cli(
            ["eval", "--ref-h", str(wav_dir / "ref_h.wav"),
             "--ref-p", str(wav_dir / "ref_p.wav"),
             "--est-h", str(wav_dir / "ref_h.wav"),
             "--est-p", str(wav_dir / "ref_p.wav"),
             "--filter-len", "8"]
        )
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        assert lines[0].startswith("track,method,sdr_h")
        vals = [float(v) for v in lines[1].split(",")[2:]]
        assert all(v >= 100.0 for v in vals)

    def test_manifest_appends_mean(self, wav_dir, tmp_path):
        manifest = tmp_path / "m.csv"
        row = ",".join(
            ["t1"] + [str(wav_dir / name) for name in
                      ("ref_h.wav", "ref_p.wav", "ref_h.wav", "ref_p.wav")]
        )
        manifest.write_text("\n".join([row.replace("t1", f"t{i}") for i in range(3)]))
        code, out = run_cli(["eval", "--manifest", str(manifest), "--filter-len", "4"])
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        assert len(lines) == 5  # header + 3 tracks + mean
        assert lines[-1].startswith("mean,")

    def test_missing_args(self):
        code, _ = run_cli(["eval"])
        assert code == EXIT_BAD_ARGS

    def test_length_mismatch(self, wav_dir, tmp_path):
        short = tmp_path / "short.wav"
        write_wav(short, Signal(np.zeros(10) + 0.1, 8000), "float32")
        code, _ = run_cli(
            ["eval", "--ref-h", str(wav_dir / "ref_h.wav"),
             "--ref-p", str(wav_dir / "ref_p.wav"),
             "--est-h", str(short), "--est-p", str(short)]
        )
        assert code == EXIT_BAD_ARGS


class TestBench:
    def test_deterministic_and_ordered_output(self, tmp_path):
        args = ["bench", "--tracks", "2", "--duration", "0.8",
                "--sample-rate", "8000", "--win", "256", "--hop", "64",
                "--iters", "5", "--filter-len", "8", "--seed", "1"]
        code1, out1 = run_cli(args + ["--out-dir", str(tmp_path / "b1")])
        code2, out2 = run_cli(args + ["--out-dir", str(tmp_path / "b2")])
        assert code1 == code2 == EXIT_OK
        assert out1 == out2
        csv1 = (tmp_path / "b1" / "bench_results.csv").read_text()
        csv2 = (tmp_path / "b2" / "bench_results.csv").read_text()
        assert csv1 == csv2
        lines = out1.strip().splitlines()
        assert lines[0].startswith("track,method")
        assert sum(1 for ln in lines if ln.startswith("mean,")) == 3


class TestDumpSpec:
    def test_spec_dump(self, wav_dir, tmp_path):
        out = tmp_path / "spec.bin"
        code, _ = run_cli(
            ["dump-spec", str(wav_dir / "mix.wav"), "--out", str(out),
             "--win", "256", "--hop", "64"]
        )
        assert code == EXIT_OK
        data, (k, t, win_len, hop) = read_spec_dump(out)
        assert (k, win_len, hop) == (129, 256, 64)
        assert data.shape == (k, t)

    def test_if_dump(self, wav_dir, tmp_path):
        out = tmp_path / "if.bin"
        code, _ = run_cli(
            ["dump-spec", str(wav_dir / "mix.wav"), "--out", str(out),
             "--win", "256", "--hop", "64", "--kind", "if"]
        )
        assert code == EXIT_OK
        data, meta = read_if_dump(out)
        assert data.shape[0] == 129
        assert np.all(np.isfinite(data))


class TestArgErrors:
    def test_unknown_command(self):
        code, _ = run_cli(["frobnicate"])
        assert code == EXIT_BAD_ARGS

    def test_separate_requires_outputs(self, wav_dir):
        code, _ = run_cli(["separate", str(wav_dir / "mix.wav")])
        assert code == EXIT_BAD_ARGS
