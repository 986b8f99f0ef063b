"""The pipeline's prompt templates.

Template wording is part of the pipeline contract: the classification
rubric, the NA sentinel, and the 1-5 scoring instructions are what the
parsers downstream rely on. Few-shot exemplar counts are fixed per
template (4 for intent classification, 3 for the planning prompts) and
surfaced through the registry.

Score-bearing and list-bearing templates carry a ``format_note`` slot,
normally bound to the empty string; reprompts bind a stricter
instruction there, which gives the retry its own cache key.
"""

from __future__ import annotations

from .gateway.templates import Modality, PromptTemplate, TemplateRegistry

INTENT_CLASSIFY = "intent-classify"
QUESTION_GEN = "question-gen"
FIGURE_DATA = "figure-data"
ANSWER_EXTRACT = "answer-extract"
CODE_GEN = "code-gen"
REPAIR_CODE = "repair-code"
COMPLETENESS_QUESTIONS = "completeness-questions"
IMAGE_ANSWER = "image-answer"
COMPLETENESS_SCORE = "completeness-score"
FAITHFULNESS_QUESTIONS = "faithfulness-questions"
FAITHFULNESS_SCORE = "faithfulness-score"
LAYOUT_SCORE = "layout-score"
SELF_REFINE = "self-refine"
REFINE_CODE = "refine-code"
CAPTION = "caption"
INTENT_GEN = "intent-gen"

NA_SENTINEL = "NA"

STRICT_SCORE_NOTE = (
    "Reply with exactly one line of the form 'Score: X' where X is a number "
    "between 1 and 5, optionally followed by a line 'Feedback: ...'."
)
STRICT_LABEL_NOTE = (
    "Answer with exactly one of: Extrapolated-Flowchart, Extrapolated-Summary, "
    "Extrapolated-Architecture, Extrapolated-Results."
)
STRICT_LIST_NOTE = "Output one question per line and nothing else."
STRICT_CODE_NOTE = "Output only a single fenced python code block."


_CLASSIFY_EXEMPLARS = (
    (
        "Intent: Create a flowchart of the four-step data cleaning procedure "
        "described in the methods section.",
        "Label: Extrapolated-Flowchart",
    ),
    (
        "Intent: Create a table to summarize the datasets used across prior "
        "work, with sizes and domains.",
        "Label: Extrapolated-Summary",
    ),
    (
        "Intent: Highlight the encoder block in the system overview figure "
        "and annotate its inputs and outputs.",
        "Label: Extrapolated-Architecture",
    ),
    (
        "Intent: Convert the accuracy table into a grouped bar chart "
        "comparing all model variants.",
        "Label: Extrapolated-Results",
    ),
)

_QUESTION_EXEMPLARS = (
    (
        "Intent: Convert the accuracy table into a grouped bar chart comparing "
        "all model variants.\nClarification Questions:",
        "Which model variants are compared?\nWhat accuracy value does each "
        "variant report?\nOn which dataset or split are the accuracies measured?",
    ),
    (
        "Intent: Create a flowchart of the training procedure.\n"
        "Clarification Questions:",
        "What are the steps of the training procedure, in order?\nWhich step "
        "produces the final model checkpoint?",
    ),
    (
        "Intent: Create a table to summarize prior benchmark datasets.\n"
        "Clarification Questions:",
        "Which prior datasets are discussed?\nWhat size and domain does each "
        "dataset have?",
    ),
)

_ANSWER_EXEMPLARS = (
    (
        "Intent: Convert the accuracy table into a bar chart.\n"
        "Section/Image data: The baseline reaches 71.2 accuracy while our "
        "model reaches 74.8.\nQuestion: What accuracy value does each model "
        "report?\nAnswer:",
        "The baseline reports 71.2 accuracy and the proposed model reports 74.8.",
    ),
    (
        "Intent: Create a flowchart of the training procedure.\n"
        "Section/Image data: We thank the reviewers for their feedback.\n"
        "Question: What are the steps of the training procedure?\nAnswer:",
        "NA",
    ),
    (
        "Intent: Summarize prior datasets in a table.\n"
        "Section/Image data: CORP-A contains 12k labelled pairs drawn from "
        "news text.\nQuestion: What size does each dataset have?\nAnswer:",
        "CORP-A contains 12k labelled pairs.",
    ),
)

_CODE_EXEMPLARS = (
    (
        "Intent: Plot the two reported accuracies as a bar chart.\n"
        "Intent Type: Extrapolated-Results\n"
        "Question-Answer pairs: Q: What accuracy does each model report? "
        "A: baseline 71.2, ours 74.8.\nGenerated Code:",
        "```python\nimport matplotlib.pyplot as plt\n"
        "fig, ax = plt.subplots()\nax.bar([\"baseline\", \"ours\"], [71.2, 74.8])\n"
        "ax.set_ylabel(\"Accuracy\")\nfig.savefig(\"diagram.png\", dpi=200)\n```",
    ),
    (
        "Intent: Create a flowchart of a two-step pipeline.\n"
        "Intent Type: Extrapolated-Flowchart\n"
        "Question-Answer pairs: Q: What are the steps? A: tokenize, then tag.\n"
        "Generated Code:",
        "```python\nimport matplotlib.pyplot as plt\nimport networkx as nx\n"
        "g = nx.DiGraph()\ng.add_edge(\"tokenize\", \"tag\")\n"
        "fig, ax = plt.subplots()\n"
        "nx.draw_networkx(g, nx.spring_layout(g, seed=3), ax=ax, node_color=\"#cde\")\n"
        "ax.axis(\"off\")\nfig.savefig(\"diagram.png\", dpi=200)\n```",
    ),
    (
        "Intent: Summarize two datasets in a table.\n"
        "Intent Type: Extrapolated-Summary\n"
        "Question-Answer pairs: Q: What size does each dataset have? "
        "A: CORP-A 12k pairs, CORP-B 3k documents.\nGenerated Code:",
        "```python\nimport matplotlib.pyplot as plt\nfig, ax = plt.subplots()\n"
        "ax.axis(\"off\")\ntable = ax.table(cellText=[[\"CORP-A\", \"12k pairs\"], "
        "[\"CORP-B\", \"3k documents\"]], colLabels=[\"Dataset\", \"Size\"], "
        "loc=\"center\")\nfig.savefig(\"diagram.png\", dpi=200)\n```",
    ),
)

_INTENT_GEN_EXEMPLARS = (
    (
        "Title: Fast Parsing with Stack Pruning\nAbstract: We prune parser "
        "stacks for speed.\nSection Content: Pruning keeps the top-8 stack "
        "items; accuracy drops 0.2 while speed doubles.\nTable Captions: "
        "Parsing speed by beam size.\nImage Captions: Parser architecture.\n"
        "Your Intent:",
        "Convert the parsing-speed-by-beam-size table into a line chart that "
        "contrasts speed against the 0.2 accuracy drop reported for pruning.",
    ),
    (
        "Title: Label-Efficient Tagging\nAbstract: Tagging with 10% labels.\n"
        "Section Content: Self-training recovers 97% of full supervision using "
        "one tenth of the labels across three languages.\nTable Captions: "
        "Accuracy by label budget.\nImage Captions: Self-training loop.\n"
        "Your Intent:",
        "Create a flowchart of the self-training loop, annotating each stage "
        "with the label budget it consumes and the accuracy it recovers.",
    ),
    (
        "Title: A Survey of Retrieval Metrics\nAbstract: We review 14 metrics.\n"
        "Section Content: Metrics divide into rank-aware and set-based "
        "families with distinct failure modes.\nTable Captions: Metric "
        "definitions.\nImage Captions: None.\nYour Intent:",
        "Create a summary table grouping the surveyed metrics into rank-aware "
        "and set-based families, listing one failure mode for each metric.",
    ),
)


def build_registry() -> TemplateRegistry:
    """Construct the registry every Gateway in this package uses."""
    registry = TemplateRegistry()

    registry.add(
        PromptTemplate(
            template_id=INTENT_CLASSIFY,
            body=(
                "You will be provided with an intent. Your task is to understand "
                "the intent of the diagram creation and classify it into one of "
                "the following labels:\n"
                "1) Extrapolated-Flowchart: If the intent is related to creating "
                "flowchart\n"
                "2) Extrapolated-Summary: If the intent is related to "
                "summarization of related work, contributions, methods, datasets "
                "or hyperparameter or experimental details mentioned in the paper\n"
                "3) Extrapolated-Architecture: If the intent is related to "
                "modifying an architecture or existing image in the paper\n"
                "4) Extrapolated-Results: If the intent is related to generate "
                "plots or visualize results\n"
                "{format_note}\n"
                "{exemplars}\n\n"
                "Intent: {intent}\n"
                "Label:"
            ),
            exemplars=_CLASSIFY_EXEMPLARS,
            exemplar_count=4,
        )
    )

    registry.add(
        PromptTemplate(
            template_id=QUESTION_GEN,
            body=(
                "Your intent of coming up with the diagram creation is provided "
                "below. Generate clarification questions based on the intent "
                "about what information needs to be extracted so that you can "
                "generate the diagram.\n"
                "{format_note}\n"
                "{exemplars}\n\n"
                "Intent: {intent}\n"
                "Clarification Questions:"
            ),
            exemplars=_QUESTION_EXEMPLARS,
            exemplar_count=3,
        )
    )

    registry.add(
        PromptTemplate(
            template_id=FIGURE_DATA,
            body=(
                "Extract raw data in the form of markdown from the image.\n"
                "Figure caption: {caption}\n"
                "Extracted Markdown:"
            ),
            modality=Modality.VISION,
        )
    )

    registry.add(
        PromptTemplate(
            template_id=ANSWER_EXTRACT,
            body=(
                "Your intent of diagram creation is presented along with the "
                "section text or image data. For the question, if the section "
                "text or image data is relevant, extract the answer to the "
                "question; if not relevant then, say 'NA'. Make sure that you "
                "do not extract information that is not present in the source "
                "text or image data.\n"
                "{exemplars}\n\n"
                "Intent: {intent}\n"
                "Section/Image data: {context}\n"
                "Question: {question}\n"
                "Answer:"
            ),
            exemplars=_ANSWER_EXEMPLARS,
            exemplar_count=3,
        )
    )

    registry.add(
        PromptTemplate(
            template_id=CODE_GEN,
            body=(
                "Generate a code in python where the intent of the diagram is "
                "provided to you, along with the intent type. The information "
                "to be presented is also in front of you. You should use the "
                "information to display the content.\n"
                "{dialect_directive}\n"
                "The code must write the finished diagram to a single image "
                "file named diagram.png in the current working directory.\n"
                "{format_note}\n"
                "{exemplars}\n\n"
                "Intent: {intent}\n"
                "Intent Type: {intent_type}\n"
                "Question-Answer pairs: {qa_pairs}\n"
                "Generated Code:"
            ),
            exemplars=_CODE_EXEMPLARS,
            exemplar_count=3,
        )
    )

    registry.add(
        PromptTemplate(
            template_id=REPAIR_CODE,
            body=(
                "The following python code failed to execute. Fix it so that it "
                "runs and writes the diagram image file named diagram.png. Keep "
                "the diagram content unchanged.\n"
                "Intent: {intent}\n"
                "Failed Code:\n{code}\n"
                "Error Log:\n{log}\n"
                "Fixed Code:"
            ),
        )
    )

    registry.add(
        PromptTemplate(
            template_id=COMPLETENESS_QUESTIONS,
            body=(
                "You are provided with the intent of diagram creation. "
                "Decompose the intent and ask questions such that the answers "
                "to those questions will determine completeness of information.\n"
                "{format_note}\n"
                "Intent: {intent}\n"
                "Questions:"
            ),
        )
    )

    registry.add(
        PromptTemplate(
            template_id=IMAGE_ANSWER,
            body=(
                "You are provided with the intent of diagram creation, an image "
                "and the corresponding code that generated the image as input. "
                "Your goal is to extract the answer of the question from the "
                "image or the code. Make sure that you do not extract "
                "information that is not present in the source code or image.\n"
                "Intent: {intent}\n"
                "Question: {question}\n"
                "Corresponding Code:\n{code}\n"
                "Answer of the Question:"
            ),
            modality=Modality.VISION,
        )
    )

    registry.add(
        PromptTemplate(
            template_id=COMPLETENESS_SCORE,
            body=(
                "You are provided with the intent of the diagram creation, "
                "answers from the PDF and the answers obtained from the image "
                "or the code. You have to determine if the answer from the "
                "PDF/intent is completely present in the answer from the "
                "image/code. Please provide a Completeness score from 1-5, "
                "where 1 denotes there is minimal completeness and 5 when there "
                "is an exact match with the PDF content. If your score is less "
                "than {feedback_below}, generate feedback on what is needed to "
                "improve the completeness.\n"
                "{format_note}\n"
                "Intent: {intent}\n"
                "Corresponding Code:\n{code}\n"
                "Answer from the PDF: {pdf_answer}\n"
                "Answer from the Diagram/Code: {diagram_answer}\n"
                "Completeness Score:"
            ),
            modality=Modality.VISION,
        )
    )

    registry.add(
        PromptTemplate(
            template_id=FAITHFULNESS_QUESTIONS,
            body=(
                "You are provided with a diagram image and the code that "
                "generated it. Generate {count} questions that would validate "
                "the correctness of the information shown in the diagram "
                "against the source paper.\n"
                "{format_note}\n"
                "Corresponding Code:\n{code}\n"
                "Questions:"
            ),
            modality=Modality.VISION,
        )
    )

    registry.add(
        PromptTemplate(
            template_id=FAITHFULNESS_SCORE,
            body=(
                "You are provided with the intent of the diagram creation, "
                "answers from the PDF and the answers obtained from the image "
                "or the code. You have to determine if the answer from the "
                "image or the code is faithful or true with respect to the "
                "answer from the PDF. Please provide a Faithfulness score from "
                "1-5, where 1 denotes there is minimal faithfulness and 5 when "
                "there is an exact match with the PDF content. If your score is "
                "less than {feedback_below}, generate feedback on what is "
                "needed to improve the faithfulness.\n"
                "{format_note}\n"
                "Intent: {intent}\n"
                "Corresponding Code:\n{code}\n"
                "Answer from the PDF: {pdf_answer}\n"
                "Answer from the Diagram/Code: {diagram_answer}\n"
                "Faithfulness Score:"
            ),
            modality=Modality.VISION,
        )
    )

    registry.add(
        PromptTemplate(
            template_id=LAYOUT_SCORE,
            body=(
                "You are provided with the intent of the diagram creation and "
                "the image. You have to determine how much readable, "
                "comprehensible, precise in terms of the look-and-feel of the "
                "diagram. By precision, it means that all the necessary "
                "scientific information conveyed in the image can be easily "
                "deciphered. Judge the diagram against these design rules:\n"
                "{rules}\n"
                "Please provide a score from 1-5, where 1 denotes there is "
                "minimal satisfaction on the look-and-feel aspect and 5 when "
                "there is nothing to complain about the look-and-feel aspect. "
                "If your score is less than {feedback_below}, generate feedback "
                "on what is needed to improve the look-and-feel.\n"
                "{format_note}\n"
                "Intent: {intent}\n"
                "Layout Score:"
            ),
            modality=Modality.VISION,
        )
    )

    registry.add(
        PromptTemplate(
            template_id=SELF_REFINE,
            body=(
                "You are provided with the intent of the diagram creation and "
                "the image. There might be some problem inside the image. "
                "Please generate feedback if you feel that there has been any "
                "inconsistency, and provide a One-step Score from 1-5.\n"
                "{format_note}\n"
                "Intent: {intent}\n"
                "One-step Score:"
            ),
            modality=Modality.VISION,
        )
    )

    registry.add(
        PromptTemplate(
            template_id=REFINE_CODE,
            body=(
                "You are provided with a diagram and the associated code that "
                "generated it. Based on {criteria_name}, the image has received "
                "a score of {score} out of 5, and feedback is generated to "
                "improve. Refine the code to incorporate the following "
                "feedback.\n"
                "{format_note}\n"
                "criteria name: {criteria_name}\n"
                "Corresponding Code:\n{code}\n"
                "Score: {score}\n"
                "Feedback: {feedback}\n"
                "Refined Code:"
            ),
            modality=Modality.VISION,
        )
    )

    registry.add(
        PromptTemplate(
            template_id=CAPTION,
            body=(
                "Describe the scientific diagram in the image in one detailed "
                "paragraph. Name the diagram type, every visible label and "
                "value, and the relationships the diagram conveys."
            ),
            modality=Modality.VISION,
        )
    )

    registry.add(
        PromptTemplate(
            template_id=INTENT_GEN,
            body=(
                "You will be given the title, abstract and summarized section "
                "content of the paper, figure and table captions in the paper, "
                "and you will have to come up with the intent of a possible "
                "type of diagram that is not there in the paper, but will be "
                "useful to create.\n"
                "Come up with an intent which will require you to process "
                "mathematical, logical reasoning on top of the extracted data "
                "from the paper, and come up with such intent that will require "
                "you to blend text and visuals from the paper to come up with "
                "the final diagram.\n"
                "The intent should be clear, comprehensive and any human can "
                "create a diagram from the paper content based on the intent.\n"
                "{exemplars}\n\n"
                "Title: {title}\n"
                "Abstract: {abstract}\n"
                "Section Content: {section_content}\n"
                "Table Captions: {table_captions}\n"
                "Image Captions: {image_captions}\n"
                "Your Intent:"
            ),
            exemplars=_INTENT_GEN_EXEMPLARS,
            exemplar_count=3,
        )
    )

    return registry


REGISTRY = build_registry()
