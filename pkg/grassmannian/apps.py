from django.apps import AppConfig


class GrassmannianConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'grassmannian'
    verbose_name = 'Grassmannian nets'
