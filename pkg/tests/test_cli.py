import json

import numpy as np
import pytest

from lfzr import TimeSeries, write_raw
from lfzr.cli import EXIT_BOUND, EXIT_CORRUPT, EXIT_IO, EXIT_OK, EXIT_USAGE, main


@pytest.fixture
def sample(tmp_path, rng):
    x = np.cumsum(rng.normal(0, 0.1, 2000)).astype(np.float32)
    path = tmp_path / "input.f32"
    write_raw(path, TimeSeries(x))
    return path, x


def test_compress_decompress_verify_pipeline(sample, tmp_path, capsys):
    path, x = sample
    cont = tmp_path / "out.lfzr"
    back = tmp_path / "back.f32"
    assert main(["compress", str(path), str(cont), "--maxerror", "1e-3"]) == EXIT_OK
    assert main(["decompress", str(cont), str(back)]) == EXIT_OK
    recon = np.fromfile(back, "<f4")
    assert np.max(np.abs(recon.astype(np.float64) - x.astype(np.float64))) <= 1e-3
    assert main(["verify", str(path), str(cont)]) == EXIT_OK
    assert "bound=ok" in capsys.readouterr().out


def test_verify_json(sample, tmp_path, capsys):
    path, x = sample
    cont = tmp_path / "out.lfzr"
    main(["compress", str(path), str(cont), "--maxerror", "1e-2"])
    assert main(["verify", str(path), str(cont), "--json"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["bound_ok"] is True
    assert payload["epsilon"] == 1e-2
    assert payload["max_abs_err"] <= 1e-2
    assert payload["n"] == 2000


def test_all_predictor_flags(sample, tmp_path, nn_weights_path):
    path, x = sample
    for extra in (
        ["--predictor", "last"],
        ["--predictor", "ca"],
        ["--predictor", "nn", "--nn-weights", nn_weights_path],
        ["--codec", "raw"],
        ["--multivariate"],
    ):
        cont = tmp_path / "o.lfzr"
        rc = main(["compress", str(path), str(cont), "--maxerror", "1e-2", *extra])
        assert rc == EXIT_OK
        assert main(["verify", str(path), str(cont)]) == EXIT_OK


def test_maxerror_zero_is_usage_error(sample, tmp_path, capsys):
    path, _ = sample
    rc = main(["compress", str(path), str(tmp_path / "o"), "--maxerror", "0"])
    assert rc == EXIT_USAGE
    assert "lossless" in capsys.readouterr().err


def test_missing_maxerror_is_usage_error(sample, tmp_path, capsys):
    path, _ = sample
    rc = main(["compress", str(path), str(tmp_path / "o")])
    assert rc == EXIT_USAGE
    capsys.readouterr()


def test_missing_input_is_io_error(tmp_path):
    rc = main(["compress", str(tmp_path / "nope"), str(tmp_path / "o"), "--maxerror", "1e-3"])
    assert rc == EXIT_IO
    rc = main(["decompress", str(tmp_path / "nope"), str(tmp_path / "o")])
    assert rc == EXIT_IO


def test_byte_flip_fuzz_every_position(tmp_path, rng, capsys):
    # a container with any single corrupted byte must decode with exit
    # code 3, never crash and never silently succeed
    x = np.cumsum(rng.normal(0, 0.1, 120)).astype(np.float32)
    src = tmp_path / "s.f32"
    write_raw(src, TimeSeries(x))
    cont = tmp_path / "c.lfzr"
    assert main(["compress", str(src), str(cont), "--maxerror", "1e-3"]) == EXIT_OK
    blob = bytearray(cont.read_bytes())
    bad = tmp_path / "bad.lfzr"
    out = tmp_path / "o.f32"
    for pos in range(len(blob)):
        blob[pos] ^= 0xA5
        bad.write_bytes(blob)
        rc = main(["decompress", str(bad), str(out)])
        assert rc == EXIT_CORRUPT, f"flip at byte {pos} gave exit {rc}"
        blob[pos] ^= 0xA5
    capsys.readouterr()


def test_verify_bound_violation_exit_code(sample, tmp_path, capsys):
    path, x = sample
    cont = tmp_path / "o.lfzr"
    main(["compress", str(path), str(cont), "--maxerror", "1e-3"])
    drifted = tmp_path / "drifted.f32"
    write_raw(drifted, TimeSeries(x + np.float32(1.0)))
    assert main(["verify", str(drifted), str(cont)]) == EXIT_BOUND
    assert "VIOLATED" in capsys.readouterr().out


def test_bench_subcommand(sample, tmp_path, capsys):
    path, _ = sample
    manifest = tmp_path / "bench.txt"
    manifest.write_text(f"{path},raw,1,1e-3;1e-2,last_value;nlms\n")
    assert main(["bench", str(manifest), "--no-timing"]) == EXIT_OK
    out = capsys.readouterr().out
    lines = out.strip().splitlines()
    assert len(lines) == 5  # header + 2 eps x 2 codecs
    assert lines[0] == (
        "dataset,codec,epsilon,n,v,compressed_bytes,ratio,"
        "max_abs_err,mean_abs_err,rmse"
    )
    report = tmp_path / "table.csv"
    assert main(["bench", str(manifest), "--no-timing", "--output", str(report)]) == EXIT_OK
    assert report.read_text() == out


def test_bad_manifest_is_usage_error(tmp_path, capsys):
    manifest = tmp_path / "bad.txt"
    manifest.write_text("only,three,fields\n")
    assert main(["bench", str(manifest)]) == EXIT_USAGE
    capsys.readouterr()


def test_csv_input(tmp_path, rng, capsys):
    rows = rng.normal(0, 1, (200, 2)).astype(np.float32)
    csvf = tmp_path / "d.csv"
    csvf.write_text("\n".join(f"{float(a)!r},{float(b)!r}" for a, b in rows) + "\n")
    cont = tmp_path / "o.lfzr"
    rc = main(
        ["compress", str(csvf), str(cont), "--maxerror", "1e-2",
         "--format", "csv", "--columns", "0,1"]
    )
    assert rc == EXIT_OK
    rc = main(["verify", str(csvf), str(cont), "--format", "csv", "--columns", "0,1"])
    assert rc == EXIT_OK
    capsys.readouterr()
