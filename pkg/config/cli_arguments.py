from config import constants
import argparse
from pathlib import Path


def _flag(key: str) -> str:
    return f'--{key.replace("_", "-")}'


def _common(targets, args, **kwargs):
    """Один и тот же аргумент для нескольких подкоманд."""
    return [{"target_parser": target, "args": args, "kwargs": dict(kwargs)} for target in targets]


CLI_ARGUMENTS_DEFINITIONS = [
    # Global arguments
    {
        "target_parser": "main",
        "args": [_flag(constants.CONFIG_PATH_KEY)],
        "kwargs": {
            "type": Path,
            "dest": constants.CONFIG_PATH_KEY,
            "help": f"Файл настроек: JSON или 'ключ = значение' (по умолчанию: {constants.DEFAULT_CONFIG_PATH}, если существует)."
        }
    },
    {
        "target_parser": "main",
        "args": [_flag(constants.LOG_FILE_KEY)],
        "kwargs": {
            "type": Path,
            "dest": constants.LOG_FILE_KEY,
            "help": f"Путь к файлу логов (по умолчанию: {constants.DEFAULT_LOG_FILE_NAME} в корне приложения)."
        }
    },
    {
        "target_parser": "main",
        "args": ["--quiet"],
        "kwargs": {
            "action": "store_const",
            "const": True,
            "dest": constants.QUIET_KEY,
            "help": "Выводить в консоль только предупреждения и ошибки."
        }
    },
]

# Model parameters and output directory for every subcommand
for _key, _help in (
    (constants.RHO_KEY, "Плотность мишеней rho, 0 < rho <= 1."),
    (constants.SIGMA_KEY, "Коэффициент диффузии sigma."),
    (constants.A0_KEY, "Базовая скорость связывания a0."),
    (constants.A1_KEY, "Коэффициент стадного связывания a1."),
    (constants.EPS_KEY, "Скорость отсоединения eps."),
):
    CLI_ARGUMENTS_DEFINITIONS += _common(constants.MODEL_COMMANDS, [_flag(_key)], type=float, dest=_key, help=_help)

CLI_ARGUMENTS_DEFINITIONS += _common(
    constants.COMMANDS, [_flag(constants.OUT_DIR_KEY)], type=Path, dest=constants.OUT_DIR_KEY,
    help=f"Директория результатов (по умолчанию: {constants.DEFAULT_OUT_DIR}).",
)
CLI_ARGUMENTS_DEFINITIONS += _common(
    constants.MODEL_COMMANDS, [_flag(constants.PRESET_KEY)], dest=constants.PRESET_KEY,
    help="Имя набора настроек из presets.yaml (например, sine-mode).",
)
CLI_ARGUMENTS_DEFINITIONS += _common(
    constants.MODEL_COMMANDS, ["--strict"], action="store_const", const="strict", dest=constants.VALIDATION_KEY,
    help="Строгая проверка параметров: каждая константа в (0, 1) (по умолчанию).",
)
CLI_ARGUMENTS_DEFINITIONS += _common(
    constants.MODEL_COMMANDS, ["--lenient"], action="store_const", const="lenient", dest=constants.VALIDATION_KEY,
    help="Мягкая проверка: константы >= 1 дают только предупреждения.",
)

# Time-dependent runs
CLI_ARGUMENTS_DEFINITIONS += _common(
    constants.TIME_COMMANDS, [_flag(constants.GRID_KEY)], dest=constants.GRID_KEY,
    help=f"Сетка NXxNY (по умолчанию: {constants.DEFAULT_GRID}).",
)
CLI_ARGUMENTS_DEFINITIONS += _common(
    constants.TIME_COMMANDS, [_flag(constants.DT_KEY)], type=float, dest=constants.DT_KEY,
    help="Шаг по времени (по умолчанию: min(1e-3, h^2 / (4 sigma))).",
)
CLI_ARGUMENTS_DEFINITIONS += _common(
    constants.TIME_COMMANDS, ["--T"], type=float, dest=constants.T_KEY,
    help=f"Горизонт расчета (по умолчанию: {constants.DEFAULT_T}).",
)
CLI_ARGUMENTS_DEFINITIONS += _common(
    constants.TIME_COMMANDS, [_flag(constants.SCHEME_KEY), "--scheme"], choices=constants.V_SCHEMES, dest=constants.SCHEME_KEY,
    help=f"Схема для v (по умолчанию: {constants.DEFAULT_SCHEME}).",
)
CLI_ARGUMENTS_DEFINITIONS += _common(
    constants.TIME_COMMANDS, [_flag(constants.INIT_KEY)], dest=constants.INIT_KEY,
    help="Начальные данные: sine-mode (или paper-fig2) | stationary | constant:U,V.",
)
CLI_ARGUMENTS_DEFINITIONS += _common(
    constants.TIME_COMMANDS, [_flag(constants.CG_RTOL_KEY)], type=float, dest=constants.CG_RTOL_KEY,
    help=f"Относительная невязка метода сопряженных градиентов (по умолчанию: {constants.DEFAULT_CG_RTOL}).",
)
CLI_ARGUMENTS_DEFINITIONS += _common(
    constants.TIME_COMMANDS, [_flag(constants.CG_MAXITER_KEY)], type=int, dest=constants.CG_MAXITER_KEY,
    help=f"Предел итераций метода сопряженных градиентов (по умолчанию: {constants.DEFAULT_CG_MAXITER}).",
)

CLI_ARGUMENTS_DEFINITIONS += [
    # stationary
    {
        "target_parser": constants.STATIONARY_COMMAND,
        "args": [_flag(constants.SWEEP_KEY)],
        "kwargs": {
            "dest": constants.SWEEP_KEY,
            "help": "Развертка по eps в виде A:B:N (N точек от A до B включительно)."
        }
    },
    {
        "target_parser": constants.STATIONARY_COMMAND,
        "args": [_flag(constants.PROFILE_KEY)],
        "kwargs": {
            "action": "store_const",
            "const": True,
            "dest": constants.PROFILE_KEY,
            "help": "Записать профиль кубической части и прямой eps*v на [-a0/a1 - 0.5, 1.5]."
        }
    },
    # evolve
    {
        "target_parser": constants.EVOLVE_COMMAND,
        "args": [_flag(constants.SNAPSHOT_EVERY_KEY)],
        "kwargs": {
            "type": int,
            "dest": constants.SNAPSHOT_EVERY_KEY,
            "help": f"Сохранять снимок каждые N шагов (по умолчанию: {constants.DEFAULT_SNAPSHOT_EVERY})."
        }
    },
    {
        "target_parser": constants.EVOLVE_COMMAND,
        "args": [_flag(constants.FIELD_TIMES_KEY)],
        "kwargs": {
            "dest": constants.FIELD_TIMES_KEY,
            "help": f"Моменты записи полей через запятую, кроме начального и конечного (по умолчанию: {constants.DEFAULT_FIELD_TIMES})."
        }
    },
    {
        "target_parser": constants.EVOLVE_COMMAND,
        "args": [_flag(constants.STOP_THRESHOLD_KEY)],
        "kwargs": {
            "type": float,
            "dest": constants.STOP_THRESHOLD_KEY,
            "help": "Остановить расчет, когда все три ошибки относительно v1 меньше порога."
        }
    },
    {
        "target_parser": constants.EVOLVE_COMMAND,
        "args": [_flag(constants.STOP_TARGET_KEY)],
        "kwargs": {
            "type": float,
            "dest": constants.STOP_TARGET_KEY,
            "help": "Значение v1 (по умолчанию: допустимый стационарный корень)."
        }
    },
    {
        "target_parser": constants.EVOLVE_COMMAND,
        "args": [_flag(constants.FIT_WINDOW_KEY)],
        "kwargs": {
            "dest": constants.FIT_WINDOW_KEY,
            "help": "Окно регрессии TA:TB (по умолчанию: [0.2 t_stop, t_stop])."
        }
    },
    {
        "target_parser": constants.EVOLVE_COMMAND,
        "args": [_flag(constants.HYPOTHESIS_CHECK_KEY)],
        "kwargs": {
            "choices": constants.HYPOTHESIS_POLICIES,
            "dest": constants.HYPOTHESIS_CHECK_KEY,
            "help": f"Проверка начальных данных на инвариантную область (по умолчанию: {constants.DEFAULT_HYPOTHESIS_CHECK})."
        }
    },
    # picard
    {
        "target_parser": constants.PICARD_COMMAND,
        "args": [_flag(constants.N_MAX_KEY)],
        "kwargs": {
            "type": int,
            "dest": constants.N_MAX_KEY,
            "help": f"Максимальное число итераций (по умолчанию: {constants.DEFAULT_N_MAX})."
        }
    },
    {
        "target_parser": constants.PICARD_COMMAND,
        "args": [_flag(constants.TOL_KEY)],
        "kwargs": {
            "type": float,
            "dest": constants.TOL_KEY,
            "help": f"Остановка при sup_t max(U_n, V_n) < tol^2 (по умолчанию: {constants.DEFAULT_TOL})."
        }
    },
    {
        "target_parser": constants.PICARD_COMMAND,
        "args": [_flag(constants.CERTIFICATE_STRIDE_KEY)],
        "kwargs": {
            "type": int,
            "dest": constants.CERTIFICATE_STRIDE_KEY,
            "help": f"Шаг прореживания моментов времени в сертификатах (по умолчанию: {constants.DEFAULT_CERTIFICATE_STRIDE})."
        }
    },
    # verify
    {
        "target_parser": constants.VERIFY_COMMAND,
        "args": [_flag(constants.QUICK_KEY)],
        "kwargs": {
            "action": "store_const",
            "const": True,
            "dest": constants.QUICK_KEY,
            "help": "Сокращенный набор проверок на грубых сетках."
        }
    },
    {
        "target_parser": constants.VERIFY_COMMAND,
        "args": [_flag(constants.PERTURB_LAPLACIAN_KEY)],
        "kwargs": {
            "action": "store_const",
            "const": True,
            "dest": constants.PERTURB_LAPLACIAN_KEY,
            "help": "Тестовый режим: подменить лапласиан неконсервативным (проверки должны упасть)."
        }
    },
    {
        "target_parser": constants.VERIFY_COMMAND,
        "args": [_flag(constants.SEED_KEY)],
        "kwargs": {
            "type": int,
            "dest": constants.SEED_KEY,
            "help": f"Зерно генератора случайных данных (по умолчанию: {constants.DEFAULT_SEED})."
        }
    },
]

SUBPARSER_DEFINITIONS = [
    {
        "name": constants.STATIONARY_COMMAND,
        "help": "Корни стационарного кубического уравнения и допустимый корень v1.",
        "formatter_class": None
    },
    {
        "name": constants.EVOLVE_COMMAND,
        "help": "Расчет эволюции (u, v) со снимками и диагностикой.",
        "formatter_class": argparse.RawTextHelpFormatter
    },
    {
        "name": constants.PICARD_COMMAND,
        "help": "Последовательные приближения и сертификаты норм Коши.",
        "formatter_class": None
    },
    {
        "name": constants.VERIFY_COMMAND,
        "help": "Набор сквозных проверок свойств схемы.",
        "formatter_class": None
    }
]
