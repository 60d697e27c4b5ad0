import logging
import math
import re
from pathlib import Path
from typing import Union

from error_handler import ConfigurationError
from config import constants

logger = logging.getLogger(__name__)

_GRID_PATTERN = re.compile(r"^\s*(\d+)\s*[xX]\s*(\d+)\s*$")
_TRUE_STRINGS = {"1", "true", "yes", "on"}
_FALSE_STRINGS = {"0", "false", "no", "off", ""}

_FLOAT_KEYS = (
    constants.RHO_KEY, constants.SIGMA_KEY, constants.A0_KEY, constants.A1_KEY, constants.EPS_KEY,
    constants.T_KEY, constants.CG_RTOL_KEY, constants.TOL_KEY,
)
_OPTIONAL_FLOAT_KEYS = (constants.DT_KEY, constants.STOP_THRESHOLD_KEY, constants.STOP_TARGET_KEY)
_POSITIVE_INT_KEYS = (
    constants.SNAPSHOT_EVERY_KEY, constants.CG_MAXITER_KEY, constants.N_MAX_KEY, constants.CERTIFICATE_STRIDE_KEY,
)
_BOOL_KEYS = (constants.QUIET_KEY, constants.PROFILE_KEY, constants.QUICK_KEY, constants.PERTURB_LAPLACIAN_KEY)
_CHOICES = {
    constants.VALIDATION_KEY: constants.VALIDATION_MODES,
    constants.SCHEME_KEY: constants.V_SCHEMES,
    constants.HYPOTHESIS_CHECK_KEY: constants.HYPOTHESIS_POLICIES,
}


class ConfigValidator:
    """
    Класс для инкапсуляции всей логики валидации конфигурации.
    Значения из файлов 'ключ = значение' и из окружения приходят строками
    и приводятся к нужным типам здесь.
    """

    def _resolve_path(self, path_val: Union[str, Path], root_dir: Path, config_key: str) -> Path:
        """Преобразует значение пути в абсолютный Path относительно корня приложения."""
        if not isinstance(path_val, (str, Path)):
            raise ConfigurationError(
                f"Значение для '{config_key}' должно быть строкой или объектом Path, получено: {type(path_val).__name__}."
            )
        resolved_path = Path(path_val)
        if not resolved_path.is_absolute():
            resolved_path = root_dir / resolved_path
        logger.debug(f"Path for '{config_key}' resolved to: {resolved_path}")
        return resolved_path

    @staticmethod
    def _to_float(config_data: dict, key: str, optional: bool = False):
        value = config_data.get(key)
        if value is None or (optional and isinstance(value, str) and value.strip().lower() in ("", "none")):
            if optional:
                config_data[key] = None
                return
            raise ConfigurationError(f"Обязательный параметр '{key}' не задан.")
        if isinstance(value, bool):
            raise ConfigurationError(f"'{key}' должен быть числом, получено: {value!r}.")
        try:
            number = float(value)
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"'{key}' должен быть числом, получено: {value!r}.") from e
        if not math.isfinite(number):
            raise ConfigurationError(f"'{key}' должен быть конечным числом, получено: {value!r}.")
        config_data[key] = number

    @staticmethod
    def _to_positive_int(config_data: dict, key: str):
        value = config_data.get(key)
        if isinstance(value, bool):
            raise ConfigurationError(f"'{key}' должен быть целым числом, получено: {value!r}.")
        try:
            number = int(str(value).strip())
        except ValueError as e:
            raise ConfigurationError(f"'{key}' должен быть целым числом, получено: {value!r}.") from e
        if number <= 0:
            raise ConfigurationError(f"'{key}' должен быть положительным целым числом, получено: {value!r}.")
        config_data[key] = number

    @staticmethod
    def _to_bool(config_data: dict, key: str):
        value = config_data.get(key)
        if isinstance(value, bool):
            return
        text = str(value).strip().lower()
        if text in _TRUE_STRINGS:
            config_data[key] = True
        elif text in _FALSE_STRINGS or value is None:
            config_data[key] = False
        else:
            raise ConfigurationError(f"'{key}' должен быть логическим значением, получено: {value!r}.")

    @staticmethod
    def _validate_grid(config_data: dict):
        value = str(config_data.get(constants.GRID_KEY))
        match = _GRID_PATTERN.match(value)
        if not match or int(match.group(1)) < 3 or int(match.group(2)) < 3:
            raise ConfigurationError(f"'{constants.GRID_KEY}' должен иметь вид NXxNY с NX, NY >= 3, получено: {value!r}.")
        config_data[constants.GRID_KEY] = f"{int(match.group(1))}x{int(match.group(2))}"

    @staticmethod
    def _validate_init(config_data: dict):
        value = str(config_data.get(constants.INIT_KEY)).strip()
        value = constants.INIT_ALIASES.get(value, value)
        if value in (constants.INIT_SINE_MODE, constants.INIT_STATIONARY):
            config_data[constants.INIT_KEY] = value
            return
        if value.startswith(constants.INIT_CONSTANT_PREFIX):
            parts = value[len(constants.INIT_CONSTANT_PREFIX):].split(",")
            try:
                if len(parts) == 2 and all(math.isfinite(float(p)) for p in parts):
                    config_data[constants.INIT_KEY] = value
                    return
            except ValueError:
                pass
        raise ConfigurationError(
            f"'{constants.INIT_KEY}' должен быть {constants.INIT_SINE_MODE}, {constants.INIT_STATIONARY} "
            f"или {constants.INIT_CONSTANT_PREFIX}U,V, получено: {value!r}."
        )

    @staticmethod
    def _parse_numbers(value: str, key: str, count: int, sep: str = ":") -> list:
        parts = str(value).split(sep)
        if len(parts) != count:
            raise ConfigurationError(f"'{key}' должен содержать {count} чисел через '{sep}', получено: {value!r}.")
        try:
            return [float(p) for p in parts]
        except ValueError as e:
            raise ConfigurationError(f"'{key}' содержит нечисловое значение: {value!r}.") from e

    def _validate_ranges(self, config_data: dict):
        sweep = config_data.get(constants.SWEEP_KEY)
        if sweep is not None and not isinstance(sweep, tuple):
            start, stop, count = self._parse_numbers(sweep, constants.SWEEP_KEY, 3)
            if count < 2 or count != int(count) or start < 0.0 or stop < start:
                raise ConfigurationError(f"'{constants.SWEEP_KEY}' требует 0 <= A <= B и целое N >= 2, получено: {sweep!r}.")
            config_data[constants.SWEEP_KEY] = (start, stop, int(count))

        window = config_data.get(constants.FIT_WINDOW_KEY)
        if window is not None and not isinstance(window, tuple):
            t_a, t_b = self._parse_numbers(window, constants.FIT_WINDOW_KEY, 2)
            if not 0.0 <= t_a < t_b:
                raise ConfigurationError(f"'{constants.FIT_WINDOW_KEY}' требует 0 <= TA < TB, получено: {window!r}.")
            config_data[constants.FIT_WINDOW_KEY] = (t_a, t_b)

        field_times = config_data.get(constants.FIELD_TIMES_KEY)
        if not isinstance(field_times, tuple):
            text = "" if field_times is None else str(field_times).strip()
            try:
                times = tuple(float(p) for p in text.split(",") if p.strip())
            except ValueError as e:
                raise ConfigurationError(f"'{constants.FIELD_TIMES_KEY}' содержит нечисловое значение: {field_times!r}.") from e
            if any(t < 0.0 for t in times):
                raise ConfigurationError(f"'{constants.FIELD_TIMES_KEY}' не может содержать отрицательные моменты.")
            config_data[constants.FIELD_TIMES_KEY] = times

    def validate(self, config_data: dict, root_dir: Path):
        """Проверяет и нормализует загруженные настройки."""
        command = config_data.get(constants.COMMAND_KEY)
        if command not in constants.COMMANDS:
            raise ConfigurationError(f"Подкоманда должна быть одной из {', '.join(constants.COMMANDS)}, получено: {command!r}.")

        config_data[constants.OUT_DIR_KEY] = self._resolve_path(config_data.get(constants.OUT_DIR_KEY), root_dir, constants.OUT_DIR_KEY)
        config_data[constants.LOG_FILE_KEY] = self._resolve_path(config_data.get(constants.LOG_FILE_KEY), root_dir, constants.LOG_FILE_KEY)

        for key in _FLOAT_KEYS:
            self._to_float(config_data, key)
        for key in _OPTIONAL_FLOAT_KEYS:
            self._to_float(config_data, key, optional=True)
        for key in _POSITIVE_INT_KEYS:
            self._to_positive_int(config_data, key)
        for key in _BOOL_KEYS:
            self._to_bool(config_data, key)

        seed = config_data.get(constants.SEED_KEY)
        try:
            config_data[constants.SEED_KEY] = int(seed)
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"'{constants.SEED_KEY}' должен быть целым числом, получено: {seed!r}.") from e

        for key, choices in _CHOICES.items():
            if config_data.get(key) not in choices:
                raise ConfigurationError(f"'{key}' должен быть одним из {', '.join(choices)}, получено: {config_data.get(key)!r}.")

        for key in (constants.T_KEY, constants.CG_RTOL_KEY, constants.TOL_KEY):
            if config_data[key] <= 0.0:
                raise ConfigurationError(f"'{key}' должен быть положительным, получено: {config_data[key]}.")
        for key in (constants.DT_KEY, constants.STOP_THRESHOLD_KEY):
            if config_data[key] is not None and config_data[key] <= 0.0:
                raise ConfigurationError(f"'{key}' должен быть положительным, получено: {config_data[key]}.")
        if config_data[constants.DT_KEY] is not None and config_data[constants.DT_KEY] > config_data[constants.T_KEY]:
            raise ConfigurationError(f"'{constants.DT_KEY}' не может превышать '{constants.T_KEY}'.")

        self._validate_grid(config_data)
        self._validate_init(config_data)
        self._validate_ranges(config_data)

        logger.info("Configuration validated.")
