"""
Edit loop errors
"""


class EditError(ValueError):
    """Base error for the edit loop"""
    pass


class AllViewsEmptyError(EditError):
    """Every view yielded an empty prototype support in a round"""
    pass


class IdMismatchError(EditError):
    """Scenes compared by id do not hold the same Gaussians"""
    pass


class ConfigError(EditError):
    """Edit configuration is malformed or out of range"""
    pass
