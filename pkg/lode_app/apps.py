from django.apps import AppConfig


class LodeAppConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'lode_app'
    verbose_name = 'Container localisation and dimension estimation'
