"""
Scene errors
"""


class SceneError(ValueError):
    """Base error for scene, camera and rendering problems"""
    pass


class InvalidGaussianError(SceneError):
    """Gaussian violates its invariants (non-SPD covariance, opacity or color out of range)"""
    pass


class InvalidCameraError(SceneError):
    """Camera rotation is not orthonormal or image size is invalid"""
    pass


class SceneFormatError(SceneError):
    """Scene or camera file is malformed"""
    pass
