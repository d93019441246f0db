"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""
# mypy: disable-error-code=no-untyped-def

import configparser
import os
from typing import TYPE_CHECKING
from unittest import mock

from exactme.config import (
    OUTPUT_DIR_ENV_VAR,
    ExactMEConfig,
    ExactMEConfigItem,
    OutputRoot,
)
from exactme_test.helpers import ExactMETestCase

if TYPE_CHECKING:
    from exactme.config import ConfigSchemaT


EXAMPLE_CONFIG_SCHEMA: "ConfigSchemaT" = {
    "test_section": {
        "SomeBoolProperty": {
            "data_type": "bool",
        },
        "SomeIntProperty": {
            "data_type": "int",
        },
        "SomeFloatProperty": {
            "data_type": "float",
        },
        "SomeStrProperty": {
            "data_type": "str",
        },
    },
}


class ExactMEConfigItemTestCase(ExactMETestCase):

    config_item_bool: ExactMEConfigItem
    config_item_int: ExactMEConfigItem
    config_item_float: ExactMEConfigItem
    config_item_str: ExactMEConfigItem
    config_patcher: "mock._patch[ConfigSchemaT]"

    @classmethod
    def setUpClass(cls):
        cls.config_patcher = mock.patch(
            "exactme.config.CONFIG_SCHEMA", new=EXAMPLE_CONFIG_SCHEMA,
        )
        cls.config_patcher.start()
        parser = configparser.RawConfigParser()
        parser.optionxform = str  # type: ignore[assignment,method-assign]
        parser.add_section("test_section")
        config_section = configparser.SectionProxy(
            parser=parser,
            name="test_section",
        )
        config_section["SomeBoolProperty"] = "yes"
        config_section["SomeIntProperty"] = "2"
        config_section["SomeFloatProperty"] = "1e-8"
        config_section["SomeStrProperty"] = "exactme_output"
        cls.config_item_bool = ExactMEConfigItem(section=config_section, key="SomeBoolProperty")
        cls.config_item_int = ExactMEConfigItem(section=config_section, key="SomeIntProperty")
        cls.config_item_float = ExactMEConfigItem(section=config_section, key="SomeFloatProperty")
        cls.config_item_str = ExactMEConfigItem(section=config_section, key="SomeStrProperty")

    @classmethod
    def tearDownClass(cls):
        cls.config_patcher.stop()

    def test_get_value_bool(self):
        typed_value = self.config_item_bool.get_bool()
        self.assertEqual(self.config_item_bool.value, "yes")
        self.assertIs(typed_value, True)

    def test_get_value_int(self):
        typed_value = self.config_item_int.get_int()
        self.assertEqual(typed_value, 2)
        self.assertIsInstance(typed_value, int)

    def test_get_value_float(self):
        typed_value = self.config_item_float.get_float()
        self.assertEqual(typed_value, 1e-8)
        self.assertIsInstance(typed_value, float)

    def test_get_value_str(self):
        typed_value = self.config_item_str.get_str()
        self.assertEqual(typed_value, "exactme_output")
        self.assertEqual(str(self.config_item_str), typed_value)
        self.assertEqual(self.config_item_str, "exactme_output")

    def test_error_item_bool_get_str(self):
        with self.assertRaises(TypeError):
            self.config_item_bool.get_str()

    def test_error_item_int_get_float(self):
        with self.assertRaises(TypeError):
            self.config_item_int.get_float()

    def test_error_item_float_get_int(self):
        with self.assertRaises(TypeError):
            self.config_item_float.get_int()

    def test_error_item_str_get_bool(self):
        with self.assertRaises(TypeError):
            self.config_item_str.get_bool()


class ExactMEConfigTestCase(ExactMETestCase):

    def test_defaults(self):
        config = ExactMEConfig()
        self.assertEqual(config.solver.QuadratureOrder.get_int(), 16)
        self.assertEqual(config.solver.CutoffPopulation.get_float(), 1e-8)
        self.assertEqual(config.output.Anchors.get_int(), 8)
        self.assertIs(config.run.Strict.get_bool(), False)

    def test_validate_rejects_values_below_minimum(self):
        parser = configparser.ConfigParser()
        parser.read_dict({"solver": {"QuadratureOrder": "2"}})
        with mock.patch(
                "exactme.config.CONFIG_SCHEMA",
                new={"solver": {"QuadratureOrder": {"data_type": "int", "default": "16", "minimum": 4}}},
        ), self.assertRaises(ValueError):
            ExactMEConfig.validate_config(parser)

    def test_validate_rejects_non_numbers(self):
        parser = configparser.ConfigParser()
        parser.read_dict({"solver": {"QuadratureTolerance": "tight"}})
        with mock.patch(
                "exactme.config.CONFIG_SCHEMA",
                new={"solver": {"QuadratureTolerance": {"data_type": "float", "default": "1e-10"}}},
        ), self.assertRaises(TypeError):
            ExactMEConfig.validate_config(parser)

    def test_output_root_prefers_environment(self):
        with mock.patch.dict(os.environ, {OUTPUT_DIR_ENV_VAR: "sweep_results"}):
            self.assertEqual(str(OutputRoot()()), "sweep_results")
