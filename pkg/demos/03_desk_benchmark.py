"""Compare augmentation strategies on the synthetic failure benchmark.

Each seed regenerates the benchmark, splits it 80/20 per class, augments
the training split to parity, and scores a decision tree on the held-out
part. Expect a few minutes per GAN strategy on one CPU core.

    python3 demos/03_desk_benchmark.py [epochs] [seeds]
"""

import sys

from rctgan import gan
from rctgan.bench import ExperimentConfig, run_experiment

epochs = int(sys.argv[1]) if len(sys.argv) > 1 else 30
seeds = int(sys.argv[2]) if len(sys.argv) > 2 else 3

cfg = ExperimentConfig(strategies=("none", "smote", "ctgan", "rctgan"), classifiers=("DT",),
                       seeds=seeds, gan=gan.GanConfig(epochs=epochs), projections=False)
report = run_experiment(cfg)
print(report.to_table())
print()
print("critic loss over the last 20% of steps:")
print(report.stability_csv())
