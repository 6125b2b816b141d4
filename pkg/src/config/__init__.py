from .settings import settings, ensure_directories

__all__ = ["settings", "ensure_directories"]
