"""Quick check that the extension module loads and its main entry points run."""

import pyfraisse as pf

ok, recs = pf.check("finlinord", "amalgamation", 2)
assert ok, recs

b = pf.build("finlinord", steps=12, seed=0)
assert len(b) == 12
assert b.verify(2)
assert b.to_text().startswith("# category=finlinord")
assert pf.build("finlinord", steps=12, seed=0).to_text() == b.to_text()

s = pf.Structure.parse("linorder 2\nlt 0 1\n")
t = pf.Structure.parse("linorder 3\nlt 0 1\nlt 1 2\n")
f = pf.Morphism(s, t, ["0", "2"])
assert f.is_arrow_in("finlinord")
assert not pf.Morphism(s, t, ["2", "0"]).is_arrow_in("finlinord")

x = pf.Structure.parse("pnspace 2\nvertex 1 0\nvertex -1 0\nvertex 0 1\nvertex 0 -1\n")
assert pf.norm(x, ["3/2", "-1/2"]) == "2"

arrows, proper = pf.rp_amalgamate("finset-maps", seed=7)
assert proper and len(arrows) == 4

name, b_, lhs, rhs = pf.rp_counterexample()
assert (b_, lhs, rhs) == ("b", "a", "c"), name

v = pf.standard_healthy(4)
tree = pf.Structure.parse("tree 3\nparent 0 1\nparent 0 2\n")
assert pf.is_t2_arrow(pf.embed_tree(tree, v))

code, out = pf.cli(["rp", "counterexample"])
assert code == 1 and "fails at b" in out

print("smoke test passed")
