"""exactme testsuite."""

import os
import tempfile

# keep test runs away from the user's config and output directories:
_SANDBOX = tempfile.mkdtemp(prefix="exactme_test_")
os.environ["XDG_CONFIG_HOME"] = os.path.join(_SANDBOX, "config")  # noqa: PTH118
os.environ["EXACTME_OUTPUT_DIR"] = os.path.join(_SANDBOX, "output")  # noqa: PTH118
