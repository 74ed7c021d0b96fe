from django.apps import AppConfig


class RendezvousConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "rendezvous"
    verbose_name = "Encontro de agentes farejadores"
