"""Built-in evaluation problem set: one problem per bundled design.

Functional problems replay each template's authored stimulus against the
golden trace of the clean design; the two adder problems use the
architecture classifier, because a correct-but-downgraded adder is
functionally indistinguishable from the intended one.
"""

from __future__ import annotations

from functools import lru_cache

from .designs import TEMPLATES
from .evaluator import EvalProblem, FunctionalChecker, StructuralChecker
from .sim import elaborate, run

_STRUCTURAL_LABELS = {
    "carry_lookahead_adder": "carry_lookahead",
    "ripple_carry_adder": "ripple_carry",
}


@lru_cache(maxsize=1)
def build_problem_set() -> tuple[EvalProblem, ...]:
    problems = []
    for template_id, template in TEMPLATES.items():
        if template_id in _STRUCTURAL_LABELS:
            checker = StructuralChecker(
                classifier="adder_architecture",
                expected_label=_STRUCTURAL_LABELS[template_id],
            )
        else:
            model = elaborate(template.parse())
            golden = run(model, template.stimulus)
            checker = FunctionalChecker(stimulus=template.stimulus, expected=golden)
        problems.append(
            EvalProblem(id=template_id, instruction=template.instruction, checker=checker)
        )
    return tuple(problems)
