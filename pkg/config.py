import os
from dotenv import dotenv_values, load_dotenv

load_dotenv()

DEFAULTS = {
    'NOISE_A': '-2',
    'NOISE_B': '1.0',
    'NOISE_MAX_RETRIES': '100',
    'CALIBRATION_TRIALS': '1000',
    'CALIBRATION_ALPHA': '0.05',
    'CALIBRATION_WORKERS': '1',
    'LOG_LEVEL': 'INFO',
    'OUTPUT_DIGITS': '17',
}


def load_settings(config_file=None) -> dict[str, tuple[str, str]]:
    """
    Raw setting values with where each came from.

    A --config file (same key=value format as .env) overrides the process
    environment and .env, which override the built-in defaults.
    """
    file_values = dotenv_values(config_file) if config_file is not None else {}
    settings = {}
    for key, default in DEFAULTS.items():
        if file_values.get(key) is not None:
            settings[key] = (file_values[key], 'config file')
        elif os.getenv(key) is not None:
            settings[key] = (os.environ[key], 'environment')
        else:
            settings[key] = (default, 'default')
    return settings
