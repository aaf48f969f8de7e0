"""Print how often each model is overruled by the weighted vote over all 4^6 vote rows."""
import itertools

import numpy as np

from ensemble_scrub.ensemble_filter import BiasVector, ensemble_predict
from ensemble_scrub.models import ModelKind

rows = np.array(list(itertools.product(range(4), repeat=6)))
verdict, _ = ensemble_predict(rows, BiasVector(), 4)
for kind in ModelKind:
    agree = np.mean(rows[:, kind] == verdict)
    print(f"{kind.label:<20} weight {BiasVector().weights[kind]:.1f}  agrees with verdict {100 * agree:5.1f}%")
