"""Certify principal symbols through the same code path as ``hdistlab check-symbol``."""

from pathlib import Path

from hdistlab.cli import check_symbol
from hdistlab.config import ExperimentConfig

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main() -> None:
    for name in ("heat_symbol.json", "bad_anisotropy.json", "transport_compact.json", "transport_degenerate.json"):
        report, ok = check_symbol(ExperimentConfig.load(CONFIGS / name))
        status = "ok" if ok else "rejected"
        deg = report.get("degeneracy")
        note = report.get("error") or f"rndc={deg['rndc_holds']} kingnl={deg['kingnl_holds']} required={deg['required']}"
        print(f"{name:28s} {status:9s} {note}")


if __name__ == "__main__":
    main()
