"""BE/AE table on the public medical transcription CSV (4 classes x 355 records).

    python scripts/run_medical.py path/to/mtsamples.csv --out-dir runs/medical
"""
import argparse

from ensemble_scrub import pipeline
from ensemble_scrub.config import PipelineConfig

REFERENCE_BE = {"NB": 75, "KNN": 74, "SVC": 73, "DT": 56, "RF": 68, "LR": 73}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv")
    ap.add_argument("--out-dir", default="runs/medical")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--bias", choices=["fixed", "ranked"], default="fixed")
    ap.add_argument("--oof", action="store_true")
    args = ap.parse_args()

    cfg = PipelineConfig(input=args.csv, out_dir=args.out_dir, seed=args.seed,
                         bias_mode=args.bias, oof=args.oof)
    report = pipeline.run_evaluate(cfg)
    print(pipeline.summary_markdown(report))
    print("model  BE    ref   AE")
    for kind, rep in report.be.items():
        print(f"{kind.name:<6} {100 * rep.accuracy:5.1f} {REFERENCE_BE[kind.name]:4d}  "
              f"{100 * report.ae[kind].accuracy:5.1f}")


if __name__ == "__main__":
    main()
