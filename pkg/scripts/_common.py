import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from hybrid_precoding.harness import emit_results, load_spec, run_experiment, summarize  # noqa: E402


def parser(description):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--spec", default=str(Path(__file__).resolve().parents[1] / "configs" / "full_scale.json"))
    p.add_argument("--trials", type=int, help="override the number of channel draws")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out-dir", default="results")
    return p


def run(args, overrides, stem):
    if args.trials is not None:
        overrides = list(overrides) + [f"trials={args.trials}"]
    spec = load_spec(args.spec, overrides)
    rows = run_experiment(spec, threads=args.threads)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    emit_results(rows, "csv", str(out / f"{stem}.csv"))
    summary = summarize(rows)
    (out / f"{stem}_summary.json").write_text(json.dumps(summary, indent=1))
    return summary


def table(summary, value, arch):
    snrs = sorted({s["snr_db"] for s in summary})
    schemes = list(dict.fromkeys(s["scheme"] for s in summary))
    lookup = {(s["scheme"], s["snr_db"]): s[value] for s in summary if s["architecture"] == arch}
    width = max(len(s) for s in schemes) + 2
    lines = ["scheme".ljust(width) + "".join(f"{snr:>11g}" for snr in snrs)]
    for name in schemes:
        lines.append(name.ljust(width) + "".join(f"{lookup[name, snr]:>11.4g}" for snr in snrs))
    return "\n".join(lines)
