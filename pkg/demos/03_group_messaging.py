"""Group-agent membership and delivery, directly and as a compiled net."""

from csnet import AgentRef, ColorSet, GroupAgent, compile_group_to_net
from csnet.group import OFF, ON, buffer_contents, inbox_contents
from csnet.net import run

group = GroupAgent("g", "weather", ON)
alice = AgentRef("alice", ON, frozenset({"weather"}))
bob = AgentRef("bob", ON, frozenset({"weather"}))
carol = AgentRef("carol", ON, frozenset({"traffic"}))
for agent in (alice, bob, carol):
    print(f"register {agent.id}: {group.register(agent).name}")

print("deliver 'rain':", group.deliver("alice", "weather", 1))
bob.st = OFF
print("bob goes quiet:", group.switch_cmp(bob).name)
print("deliver 'sun':", group.deliver("alice", "weather", 2))
print("off-topic message:", group.deliver("alice", "traffic", 3))
for aid in group.members():
    print(f"  {aid} buffer: {buffer_contents(group.agents[aid])}")
print("invariant problems:", group.check_invariants() or "none")

# the same group as a net fragment: one relay chain through active members
fresh = GroupAgent("g", "weather", ON)
for aid, st in (("alice", ON), ("bob", OFF)):
    fresh.register(AgentRef(aid, st, frozenset({"weather"})))
cs = compile_group_to_net(fresh, ColorSet.int_range("P", 0, 3), published=[("weather", 1), ("weather", 2)])
final = run(cs.net, seed=0).final
for aid in fresh.members():
    print(f"  net inbox of {aid}: {inbox_contents(cs, final, aid)}")
