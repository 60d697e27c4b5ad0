import os
import json
from pathlib import Path
import logging
import copy

from config import constants
from config.preset_config import PresetConfig
from error_handler import ConfigurationError
from config.validator import ConfigValidator

logger = logging.getLogger(__name__)


class Config:
    """
    Централизованный менеджер конфигурации.
    Загружает настройки из различных источников с определенным приоритетом:
    Defaults -> File -> Preset -> Environment Variables -> CLI Arguments.
    """

    def __init__(self, root_dir: Path, validator: ConfigValidator):
        self._settings = {}
        self.root_dir = root_dir
        self._default_config_file = self.root_dir / constants.DEFAULT_CONFIG_PATH
        self._validator = validator

    def _load_defaults(self):
        """Устанавливает значения по умолчанию для всех известных настроек."""
        self._settings.update({
            constants.COMMAND_KEY: None,
            constants.PRESET_KEY: None,
            constants.PRESET_CONFIG_PATH_KEY: constants.DEFAULT_PRESET_CONFIG_PATH,
            constants.LOG_FILE_KEY: constants.DEFAULT_LOG_FILE_NAME,
            constants.QUIET_KEY: False,
            constants.OUT_DIR_KEY: constants.DEFAULT_OUT_DIR,
            constants.RHO_KEY: constants.DEFAULT_RHO,
            constants.SIGMA_KEY: constants.DEFAULT_SIGMA,
            constants.A0_KEY: constants.DEFAULT_A0,
            constants.A1_KEY: constants.DEFAULT_A1,
            constants.EPS_KEY: constants.DEFAULT_EPS,
            constants.VALIDATION_KEY: constants.DEFAULT_VALIDATION,
            constants.GRID_KEY: constants.DEFAULT_GRID,
            constants.DT_KEY: None,
            constants.T_KEY: constants.DEFAULT_T,
            constants.SCHEME_KEY: constants.DEFAULT_SCHEME,
            constants.INIT_KEY: constants.DEFAULT_INIT,
            constants.SNAPSHOT_EVERY_KEY: constants.DEFAULT_SNAPSHOT_EVERY,
            constants.FIELD_TIMES_KEY: constants.DEFAULT_FIELD_TIMES,
            constants.STOP_THRESHOLD_KEY: None,
            constants.STOP_TARGET_KEY: None,
            constants.FIT_WINDOW_KEY: None,
            constants.CG_RTOL_KEY: constants.DEFAULT_CG_RTOL,
            constants.CG_MAXITER_KEY: constants.DEFAULT_CG_MAXITER,
            constants.HYPOTHESIS_CHECK_KEY: constants.DEFAULT_HYPOTHESIS_CHECK,
            constants.SWEEP_KEY: None,
            constants.PROFILE_KEY: False,
            constants.N_MAX_KEY: constants.DEFAULT_N_MAX,
            constants.TOL_KEY: constants.DEFAULT_TOL,
            constants.CERTIFICATE_STRIDE_KEY: constants.DEFAULT_CERTIFICATE_STRIDE,
            constants.QUICK_KEY: False,
            constants.PERTURB_LAPLACIAN_KEY: False,
            constants.SEED_KEY: constants.DEFAULT_SEED,
        })
        logger.debug("Defaults loaded: %s", self._settings)

    @property
    def known_keys(self) -> set:
        return set(self._settings) | {constants.CONFIG_PATH_KEY}

    def _check_keys(self, values: dict, source: str):
        unknown = sorted(set(values) - self.known_keys)
        if unknown:
            raise ConfigurationError(f"Неизвестные ключи в {source}: {', '.join(unknown)}")

    @staticmethod
    def _parse_key_value_text(text: str, filepath: Path) -> dict:
        """Плоский формат 'ключ = значение', строки с '#' - комментарии."""
        settings = {}
        for line_no, raw_line in enumerate(text.splitlines(), start=1):
            line = raw_line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"Строка {line_no} файла '{filepath}' не имеет вида 'ключ = значение': {raw_line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            settings[key] = value
        return settings

    def _load_from_file(self, filepath: Path, required: bool):
        """Загружает настройки из JSON-файла или из файла 'ключ = значение'."""
        try:
            text = filepath.read_text(encoding='utf-8')
        except FileNotFoundError as e:
            if required:
                raise ConfigurationError(f"Файл настроек не найден: '{filepath}'") from e
            # Файла по умолчанию может не быть: остаются значения по умолчанию и другие источники.
            logger.debug("Config file not found at '%s'. Proceeding with defaults and other sources.", filepath)
            return
        except PermissionError as e:
            raise ConfigurationError(f"Нет доступа к файлу настроек '{filepath}': {e}") from e

        if filepath.suffix.lower() == ".json":
            try:
                file_settings = json.loads(text)
            except json.JSONDecodeError as e:
                raise ConfigurationError(f"Ошибка разбора JSON в файле настроек '{filepath}': {e}") from e
            if not isinstance(file_settings, dict):
                raise ConfigurationError(f"Файл настроек '{filepath}' должен содержать JSON-объект.")
        else:
            file_settings = self._parse_key_value_text(text, filepath)

        self._check_keys(file_settings, f"файле '{filepath}'")
        self._settings.update(file_settings)
        logger.info("Settings loaded from file: %s", filepath)
        logger.debug("File settings: %s", file_settings)

    def _load_preset(self, preset_name: str):
        """Применяет именованный набор настроек из YAML-файла."""
        presets_path = Path(self._settings[constants.PRESET_CONFIG_PATH_KEY])
        if not presets_path.is_absolute():
            presets_path = self.root_dir / presets_path
        presets = PresetConfig.load_and_validate(presets_path)
        if preset_name not in presets:
            raise ConfigurationError(
                f"Набор настроек '{preset_name}' не найден в '{presets_path}'. Доступны: {', '.join(sorted(presets))}"
            )
        preset = presets[preset_name]
        self._check_keys(preset, f"наборе '{preset_name}'")
        self._settings.update(preset)
        logger.info("Preset '%s' applied from %s", preset_name, presets_path)

    def _load_from_env(self) -> dict:
        """Загружает настройки из переменных окружения CADHERIN_<KEY>."""
        env_settings = {}
        for key in self.known_keys:
            value = os.getenv(constants.ENV_PREFIX + key.upper())
            if value is not None:
                env_settings[key] = value
        if env_settings:
            logger.info("Settings loaded from environment: %s", sorted(env_settings))
        logger.debug("Environment variables checked.")
        return env_settings

    def _apply_cli_values(self, cli_values: dict):
        """Применяет настройки из аргументов командной строки (None не переопределяет)."""
        applied = {key: value for key, value in cli_values.items() if value is not None}
        self._check_keys(applied, "аргументах командной строки")
        self._settings.update(applied)
        logger.info("Settings loaded from CLI arguments: %s", applied)

    def get_redacted_settings(self) -> dict:
        """Глубокая копия настроек для вывода в лог и в манифест."""
        return copy.deepcopy(self._settings)

    def load(self, cli_values: dict = None):
        """
        Главная точка входа для загрузки конфигурации.
        Набор настроек ищется в CLI, затем в окружении, затем в файле.
        """
        cli_values = cli_values or {}
        self._load_defaults()

        explicit_file = cli_values.get(constants.CONFIG_PATH_KEY)
        if explicit_file is not None:
            filepath = Path(explicit_file)
            if not filepath.is_absolute():
                filepath = Path.cwd() / filepath
            self._load_from_file(filepath, required=True)
        else:
            self._load_from_file(self._default_config_file, required=False)

        env_settings = self._load_from_env()
        preset_name = (
            cli_values.get(constants.PRESET_KEY)
            or env_settings.get(constants.PRESET_KEY)
            or self._settings.get(constants.PRESET_KEY)
        )
        if preset_name:
            self._load_preset(preset_name)

        self._settings.update(env_settings)
        self._apply_cli_values(cli_values)
        logger.info("Final configuration loaded.")
        logger.debug("Final settings: %s", self.get_redacted_settings())

    def get(self, key: str, default=None):
        """Получает значение настройки по ключу."""
        return self._settings.get(key, default)

    def validate(self):
        """Выполняет валидацию загруженных настроек, используя ConfigValidator."""
        self._validator.validate(self._settings, self.root_dir)
