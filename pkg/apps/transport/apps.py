from django.apps import AppConfig


class TransportConfig(AppConfig):
    name = 'apps.transport'
    verbose_name = 'Layered transport'
