"""Critics: mean arithmetic, threshold strictness, feedback rules, parsing."""

from __future__ import annotations

import pytest

from figcraft.critics import (
    Aspect,
    AspectConfig,
    CritiqueReport,
    assess_completeness,
    assess_faithfulness,
    assess_generic,
    assess_layout,
    build_report,
)
from figcraft.errors import UnparseableScore

from conftest import scripted_gateway


def test_mean_of_4_5_3_is_exactly_4():
    report = build_report(
        Aspect.COMPLETENESS,
        [("q1", 4.0), ("q2", 5.0), ("q3", 3.0)],
        [("q1", "more detail"), ("q3", "missing step")],
        AspectConfig(),
    )
    assert report.score == 4.0
    assert report.satisfied is False
    assert report.feedback != ""


def test_all_fives_satisfied_with_empty_feedback():
    report = build_report(
        Aspect.COMPLETENESS, [("q1", 5.0), ("q2", 5.0)], [], AspectConfig()
    )
    assert report.score == 5.0
    assert report.satisfied is True
    assert report.feedback == ""


def test_exactly_threshold_is_not_satisfied_and_feedback_empty():
    # 4.5 exactly: not satisfied (strict >), but below-floor feedback not required.
    report = build_report(
        Aspect.FAITHFULNESS, [("q1", 4.0), ("q2", 5.0)], [("q1", "fix")], AspectConfig()
    )
    assert report.score == 4.5
    assert report.satisfied is False
    assert report.feedback == ""


def test_feedback_nonempty_iff_below_floor():
    low = build_report(Aspect.LAYOUT, (), (), AspectConfig(), single_score=4.4)
    high = build_report(Aspect.LAYOUT, (), (), AspectConfig(), single_score=4.6)
    assert low.feedback != "" and high.feedback == ""


def test_report_rejects_score_not_equal_to_mean():
    with pytest.raises(ValueError):
        CritiqueReport(
            aspect=Aspect.COMPLETENESS,
            score=4.2,
            feedback="",
            sub_scores=(("q", 4.0), ("r", 5.0)),
            satisfied=False,
        )


def test_config_bounds():
    with pytest.raises(ValueError):
        AspectConfig(threshold=0.5)
    with pytest.raises(ValueError):
        AspectConfig(max_iterations=-1)


# --- scripted end-to-end critic flows -------------------------------------------------


def test_completeness_scripted_sub_scores(ok_version, intent_flowchart, bundle):
    gateway = scripted_gateway(
        queue=[
            "1. Are all stages shown?\n2. Is the order right?\n3. Are labels present?",
            "stages parse and rank are shown",
            "Score: 4\nFeedback: render stage missing",
            "order looks correct",
            "Score: 5",
            "labels present",
            "Score: 3\nFeedback: arbitration label absent",
        ]
    )
    report = assess_completeness(ok_version, intent_flowchart, [bundle], gateway)
    assert report.aspect is Aspect.COMPLETENESS
    assert [s for _, s in report.sub_scores] == [4.0, 5.0, 3.0]
    assert report.score == 4.0
    assert report.satisfied is False
    assert "render stage missing" in report.feedback
    assert "arbitration label absent" in report.feedback


def test_completeness_requires_rendered_version(ok_version, intent_flowchart, bundle):
    from dataclasses import replace

    from figcraft.renderer import RenderResult
    from figcraft.sandbox import ExecStatus

    broken = replace(
        ok_version,
        render=RenderResult(status=ExecStatus.EXEC_ERROR, log="boom"),
    )
    with pytest.raises(ValueError):
        assess_completeness(broken, intent_flowchart, [bundle], scripted_gateway())


def test_faithfulness_contradiction_scores_floor(ok_version, bundle):
    gateway = scripted_gateway(
        queue=[
            "1. What throughput is shown?\n2. How many stages are shown?",
            "212k ops per second",  # answer from paper passage
            "diagram shows 300k ops",  # answer from diagram
            "Score: 1\nFeedback: diagram contradicts the paper's 212k figure",
            "three stages",
            "three stages",
            "Score: 5",
        ]
    )
    report = assess_faithfulness(ok_version, [bundle], gateway)
    assert report.sub_scores[0][1] == 1.0
    assert report.score == 3.0
    assert "212k" in report.feedback
    # feedback names the offending question
    assert report.sub_scores[0][0] in report.feedback


def test_faithfulness_agreement_satisfied(ok_version, bundle):
    gateway = scripted_gateway(
        queue=[
            "- does the cache reach 212k?",
            "yes, 212k ops per second",
            "the diagram shows 212k",
            "Score: 5",
        ]
    )
    report = assess_faithfulness(ok_version, [bundle], gateway)
    assert report.score == 5.0
    assert report.satisfied is True


def test_layout_score_parser_plain(ok_version, intent_flowchart):
    report = assess_layout(ok_version, intent_flowchart, scripted_gateway(queue=["Score: 5"]))
    assert report.score == 5.0 and report.satisfied


def test_layout_score_with_inline_feedback(ok_version, intent_flowchart):
    report = assess_layout(
        ok_version,
        intent_flowchart,
        scripted_gateway(queue=["Score: 3\nFeedback: overlapping legend"]),
    )
    assert report.score == 3.0
    assert "overlapping" in report.feedback


def test_layout_prompt_carries_rule_checklist(ok_version, intent_flowchart):
    gateway = scripted_gateway(queue=["Score: 5"])
    assess_layout(ok_version, intent_flowchart, gateway)
    prompt = gateway.provider.calls[0]
    assert "Legends and titles do not overlap" in prompt


def test_out_of_range_score_reprompts_once_then_raises(ok_version, intent_flowchart):
    gateway = scripted_gateway(queue=["Score: 7", "Score: 9"])
    with pytest.raises(UnparseableScore):
        assess_layout(ok_version, intent_flowchart, gateway)
    assert len(gateway.provider.calls) == 2
    assert "exactly one line" in gateway.provider.calls[1]


def test_out_of_range_recovers_on_reprompt(ok_version, intent_flowchart):
    gateway = scripted_gateway(queue=["Score: 0", "Score: 4"])
    report = assess_layout(ok_version, intent_flowchart, gateway)
    assert report.score == 4.0


def test_generic_critic_single_call(ok_version, intent_flowchart):
    gateway = scripted_gateway(queue=["One-step Score: 2\nFeedback: bars unlabeled"])
    report = assess_generic(ok_version, intent_flowchart, gateway)
    assert report.aspect is Aspect.GENERIC
    assert report.score == 2.0
    assert "unlabeled" in report.feedback


def test_critics_do_not_mutate_version(ok_version, intent_flowchart):
    before_code = ok_version.code
    before_render = ok_version.render
    assess_layout(ok_version, intent_flowchart, scripted_gateway(queue=["Score: 5"]))
    assert ok_version.code is before_code and ok_version.render is before_render
