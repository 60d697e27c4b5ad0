import importlib
import logging

logger = logging.getLogger(__name__)

# Пакеты, без которых не работает ни одна подкоманда.
CORE_DEPENDENCIES = [
    {"module_name": "numpy", "friendly_name": "NumPy", "install_command": "pip install numpy"},
    {"module_name": "scipy", "friendly_name": "SciPy", "install_command": "pip install 'scipy>=1.12'"},
    {"module_name": "pydantic", "friendly_name": "Pydantic", "install_command": "pip install 'pydantic>=2'"},
    {"module_name": "yaml", "friendly_name": "PyYAML", "install_command": "pip install PyYAML"},
]


def check_dependencies(dependencies_list: list[dict]) -> list[dict]:
    """
    Пробует импортировать каждый модуль из списка.

    Возвращает:
        list[dict]: Отсутствующие зависимости с ключами 'module_name',
                   'friendly_name' и 'install_command'; пустой список, если все на месте.
    """
    missing_dependencies = []
    for dep_info in dependencies_list:
        try:
            importlib.import_module(dep_info["module_name"])
        except ImportError as e:
            logger.debug("Dependency %s is not importable: %s", dep_info["module_name"], e)
            missing_dependencies.append({
                "module_name": dep_info["module_name"],
                "friendly_name": dep_info["friendly_name"],
                "install_command": dep_info["install_command"],
            })
    return missing_dependencies
