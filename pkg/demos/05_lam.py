"""Learn an action sequence from repeated demonstrations."""

from csnet.scenarios import lam as L
from csnet.scenarios.runner import run_scenario

config = L.LamConfig(["a", "b", "c"], [["a", "b", "c", "b"]], repetitions=6)
csnet = L.build_lam_net(config)
report = run_scenario(csnet, config, seed=0)
for i, acc in enumerate(report.prediction_accuracy, 1):
    print(f"repetition {i}: accuracy {acc:.2f}")

model = L.final_model(config, report.trace.final)
for context in config.contexts:
    print(f"after {context!r} predict {model.predict(context)!r}")
