"""figcraft: paper-to-diagram generation with critic-guided refinement.

The package turns a parsed scientific paper plus a user's diagram intent
into a rendered figure: a planner grounds the intent in retrieved paper
content as question-answer pairs, a renderer generates and executes
intermediate Python code, and three aspect critics (completeness,
faithfulness, layout) drive iterative refinement of the result.
"""

__version__ = "0.1.0"
