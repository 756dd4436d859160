"""Regenerate the committed sky12 fixture (12 satellites above a 10 deg mask)."""
from pathlib import Path

import numpy as np

from crowdspoof.geometry import SkyView, write_sky

SEED = 20210621

rng = np.random.default_rng(SEED)
# uniform in sin(el) between the mask and zenith: more satellites near the horizon
el = np.degrees(np.arcsin(rng.uniform(np.sin(np.radians(10.0)), 1.0, 12)))
az = rng.uniform(0.0, 360.0, 12)
order = np.argsort(az)
ids = [2, 5, 6, 9, 12, 15, 17, 19, 20, 24, 25, 29]
sky = SkyView.from_angles(np.round(el[order], 4), np.round(az[order], 4), ids)
out = Path(__file__).resolve().parents[1] / "src" / "crowdspoof" / "data" / "sky12.txt"
write_sky(sky, out, header=f"sky12 open-sky fixture, seed {SEED}, 10 deg elevation mask")
print(out)
