"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""

# pylint: disable=protected-access,pointless-statement

# pylint: disable=import-error,no-name-in-module
from vulture.whitelist_utils import Whitelist  # type: ignore[import]

whitelist = Whitelist()

whitelist.Any
whitelist.Final
whitelist.NoReturn
whitelist.NotRequired
whitelist.Sequence
whitelist.FrameType
whitelist.TracebackType

whitelist.config.ConfigValueType.data_type
whitelist.config.ConfigValueType.default
whitelist.config.ConfigValueType.minimum

whitelist.scenario.ScenarioValueType.data_type
whitelist.scenario.ScenarioValueType.default
whitelist.scenario.ScenarioValueType.minimum
whitelist.scenario.ScenarioValueType.above
whitelist.scenario.ScenarioValueType.choices

whitelist.main.OutputEncodingWrapper.original_stdout
whitelist.main.OutputEncodingWrapper.original_stderr

whitelist.exactme_test.TestResult
