"""Regenerate the bundled demo datasets (deterministic; safe to rerun).

Writes demos/data/twozone (the full showcase system: both zones, three
networks, capture chain, blue hydrogen) and demos/data/micro (one zone,
wind + gas + battery + a hydrogen loop, quick to solve).
"""

from pathlib import Path

from gridcap.synthetic import micro_system, two_zone_system

HERE = Path(__file__).resolve().parent

if __name__ == "__main__":
    for ds in (two_zone_system(), micro_system(h2=True)):
        target = HERE / "data" / ds.name
        ds.save(target)
        print(f"{ds.name}: {sum(ds.summary().values())} rows -> {target}")
