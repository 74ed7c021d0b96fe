from pathlib import Path

import dj_database_url
from decouple import config

BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config("SECRET_KEY", default="django-insecure-change-me")
DEBUG = config("DEBUG", default=True, cast=bool)
ALLOWED_HOSTS: list[str] = []

INSTALLED_APPS = [
    "rendezvous",
]

database_url = config("DATABASE_URL", default="")
if database_url and "://" in database_url and not database_url.startswith("://"):
    DATABASES = {"default": dj_database_url.parse(database_url, conn_max_age=600)}
else:
    DATABASES = {
        "default": {
            "ENGINE": "django.db.backends.sqlite3",
            "NAME": BASE_DIR / "db.sqlite3",
        }
    }

LANGUAGE_CODE = "pt-br"
TIME_ZONE = "America/Sao_Paulo"
USE_I18N = True
USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

LOG_LEVEL = config("LOG_LEVEL", default="INFO")
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(asctime)s %(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "plain"},
    },
    "loggers": {
        "rendezvous": {"handlers": ["console"], "level": LOG_LEVEL, "propagate": False},
    },
}

RENDEZVOUS_TOUCH_BRACKET_BITS = config("RENDEZVOUS_TOUCH_BRACKET_BITS", default=40, cast=int)
RENDEZVOUS_ORACLE_DT = config("RENDEZVOUS_ORACLE_DT", default="1/1024")
RENDEZVOUS_SWEEP_WORKERS = config("RENDEZVOUS_SWEEP_WORKERS", default=1, cast=int)
RENDEZVOUS_DECIMAL_DIGITS = config("RENDEZVOUS_DECIMAL_DIGITS", default=12, cast=int)
RENDEZVOUS_MAX_DENOMINATOR = config("RENDEZVOUS_MAX_DENOMINATOR", default=65536, cast=int)
