"""Write the ready-made networks to specs/*.toml."""

from pathlib import Path

from spikechain.models import (asymmetric_pair, excitatory_pair, mixed_network, serialize,
                               symmetric_pair)

OUT = Path(__file__).resolve().parent.parent / "specs"

NETWORKS = {
    "symmetric_pair": symmetric_pair(),
    "asymmetric_pair": asymmetric_pair(),
    "excitatory_pair": excitatory_pair(),
    "mixed10": mixed_network(),
}

if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    for name, spec in NETWORKS.items():
        (OUT / f"{name}.toml").write_text(serialize(spec))
        print(OUT / f"{name}.toml")
