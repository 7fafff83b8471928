"""Report files and console summaries"""

import csv
from pathlib import Path
from typing import Dict

from .data_io import write_statistics
from .harness import ExperimentReport


def generate_report(report: ExperimentReport, directory: str) -> Dict[str, Path]:
    """Write report.json, per_n.csv and, when collected, statistics.csv"""
    out_dir = Path(directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    print(f"\n📊 Generating report in {out_dir}")

    written: Dict[str, Path] = {}
    json_path = out_dir / "report.json"
    with open(json_path, "w", encoding="utf-8") as f:
        f.write(report.to_json())
        f.write("\n")
    written["json"] = json_path

    csv_path = out_dir / "per_n.csv"
    columns = ["n", "mean", "mean_se", "variance", "variance_se", "skewness", "excess_kurtosis",
               "raw_variance", "raw_variance_se", "wick_variance", "wick_z"]
    with open(csv_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for entry in report.per_n:
            moments = entry["normalized"]
            writer.writerow([
                entry["n"],
                moments["mean"],
                moments["mean_se"],
                moments["variance"],
                moments["variance_se"],
                moments["skewness"],
                moments["excess_kurtosis"],
                entry["raw_variance"],
                entry["raw_variance_se"],
                entry.get("wick_variance", ""),
                entry.get("wick_z", ""),
            ])
    written["per_n"] = csv_path

    if report.statistics:
        stats_path = out_dir / "statistics.csv"
        write_statistics(str(stats_path), report.statistics)
        written["statistics"] = stats_path

    print(f"✓ Report saved to {json_path}")
    return written


def print_summary(report: ExperimentReport) -> None:
    """Print experiment summary to console"""
    print("\n" + "=" * 80)
    print("EXPERIMENT SUMMARY")
    print("=" * 80)
    print(f"Config hash:       {report.config_hash[:16]}")
    print(f"Regime:            {report.regime.get('regime')} (expected nu = {report.regime.get('expected_nu')})")
    print(f"Declared nu:       {report.config.get('nu')}")
    print(f"Ladder points:     {len(report.per_n)}/{len(report.config.get('ladder', []))}")
    print(f"Variance claims:   {'yes' if report.variance_claims else 'no, too few replicates'}")
    print()
    for entry in report.per_n:
        moments = entry["normalized"]
        line = (
            f"n = {entry['n']:<6d} var = {moments['variance']:.6g} ± {moments['variance_se']:.2g}"
            f"   kurt = {moments['excess_kurtosis']:+.3f}"
        )
        if "wick_z" in entry:
            line += f"   wick z = {entry['wick_z']:+.2f}"
        print(line)
    if report.regression:
        print()
        print(
            f"📈 Slope of log Var: {report.regression['slope']:.4f} ± {report.regression['half_width']:.4f}"
        )
    for name, value in report.references.items():
        if isinstance(value, dict):
            value = value.get("sigma2")
        print(f"📐 {name}: {value}")
    if report.kappa:
        mark = "✓" if report.kappa["acceptance_ready"] else "⚠"
        print(f"{mark} κ drift: {100 * report.kappa['drift']:.2f}%")
    print("=" * 80)

    if not report.complete:
        print("\n⚠ Report is incomplete")
    for note in report.notes:
        print(f"⚠ {note}")
