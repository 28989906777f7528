"""f451 Labs SLEEC runtime."""

__version__ = '0.1.0'
__app_name__ = 'f451-sleec'
