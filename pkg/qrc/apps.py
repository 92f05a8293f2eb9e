from django.apps import AppConfig


class QrcConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'qrc'
    verbose_name = 'Quantum reservoir computing'
