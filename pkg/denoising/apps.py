from django.apps import AppConfig


class DenoisingConfig(AppConfig):
    name = 'denoising'

    def ready(self):
        import denoising.signals  # noqa: F401
