# config/preset_config.py
import yaml
from pathlib import Path
from typing import Dict, Any


from error_handler import ConfigurationError


class PresetConfig:
    """
    Утилитарный класс для загрузки и валидации файла именованных наборов настроек.
    """

    @staticmethod
    def load_and_validate(file_path: Path) -> Dict[str, Dict[str, Any]]:
        """
        Загружает и валидирует YAML-файл с наборами настроек.

        Args:
            file_path (Path): Путь к YAML-файлу.

        Returns:
            Dict[str, Dict[str, Any]]: Наборы настроек по именам.

        Raises:
            ConfigurationError: Если файл не найден, некорректен или не проходит валидацию.
        """
        try:
            with file_path.open('r', encoding='utf-8') as f:
                presets = yaml.safe_load(f)

            if not isinstance(presets, dict) or not presets:
                raise ConfigurationError(
                    f"Содержимое файла наборов настроек '{file_path}' должно быть непустым словарем."
                )

            for preset_name, preset in presets.items():
                if not isinstance(preset, dict):
                    raise ConfigurationError(
                        f"Набор '{preset_name}' в файле '{file_path}' должен быть словарем."
                    )
                nested = [key for key, value in preset.items() if isinstance(value, (dict, list))]
                if nested:
                    raise ConfigurationError(
                        f"Набор '{preset_name}' должен быть плоским; вложенные значения у ключей: {', '.join(nested)}."
                    )

            return presets

        except yaml.YAMLError as e:
            raise ConfigurationError(f"Ошибка парсинга YAML в файле '{file_path}': {e}") from e
        except OSError as e:
            raise ConfigurationError(f"Ошибка доступа к файлу наборов настроек '{file_path}': {e}") from e
