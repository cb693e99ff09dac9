"""Class label codes, fixed project-wide.

``failure`` is the positive class everywhere: it carries the error-evoked
deflections and is what a detector is meant to flag.
"""

SUCCESS = 0
FAILURE = 1

LABEL_NAMES = {SUCCESS: "success", FAILURE: "failure"}
