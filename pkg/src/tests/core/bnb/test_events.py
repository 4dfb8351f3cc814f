from unittest import TestCase

from speedbump_mpc.core.bnb.events import IncumbentFound, NodeBranched, NodePruned


class NodeEventTests(TestCase):
    def test_branch_trace_line(self) -> None:
        event = NodeBranched(node_index=3, depth=1, bound=1.5, column=7, value=0.25)
        self.assertEqual(
            event.to_trace_line(),
            "node=3 depth=1 bound=1.5 action=branch column=7 value=0.25",
        )

    def test_prune_trace_line(self) -> None:
        event = NodePruned(node_index=4, depth=2, bound=float("inf"), reason="bound")
        self.assertEqual(
            event.to_trace_line(), "node=4 depth=2 bound=inf action=prune reason=bound"
        )

    def test_float_formatting(self) -> None:
        event = IncumbentFound(
            node_index=1, depth=0, bound=-0.0, objective=1.0 / 3.0
        )
        self.assertEqual(
            event.to_trace_line(),
            "node=1 depth=0 bound=0 action=incumbent objective=0.333333333333",
        )
