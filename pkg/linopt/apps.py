from django.apps import AppConfig


class LinoptConfig(AppConfig):
    name = 'linopt'
    verbose_name = 'Linear-optics W-state simulator'

    def ready(self):
        from django.test.signals import setting_changed

        from linopt.conf import reset_config

        setting_changed.connect(reset_config)
