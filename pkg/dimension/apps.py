from django.apps import AppConfig


class DimensionConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'dimension'
    verbose_name = 'Dimension estimates'
