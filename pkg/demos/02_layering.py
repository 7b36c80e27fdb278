"""Assign places and transitions to spaces and let the validator find a bypass."""

from pathlib import Path

from csnet import CommSpaceNet, flow_classify, load_netfile, space_projection, validate_layering
from csnet.commspace import SpaceKind

NETS = Path(__file__).resolve().parent / "nets"

ok = load_netfile(NETS / "two_places.json").csnet
print("two_places:", validate_layering(ok) or "no violations")

bad = load_netfile(NETS / "bypass.json").csnet
for v in validate_layering(bad):
    print("bypass.json:", v)

# moving the transition to observation makes the same flow legal
fixed = CommSpaceNet.build(bad.net, bad.spaces.places, {**bad.spaces.transitions, "T1": "observation"})
print("with T1 in observation:", validate_layering(fixed) or "no violations")
print("flow kind of T1:", flow_classify(fixed, "T1").name)

projection = space_projection(fixed, SpaceKind.COMPUTATION)
print("computation-space places:", sorted(projection.places))
