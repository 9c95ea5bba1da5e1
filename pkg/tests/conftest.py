"""
Shared fixtures: hand-built Gaussians and cameras, the toy scenario and its evidence
"""
import numpy as np
import pytest

from editing import scenario_evidence, toy_scenario
from scene import Camera, Gaussian


def build_gaussian(
    gid=0,
    center=(0.0, 0.0, 5.0),
    std=0.1,
    color=(0.5, 0.5, 0.5),
    opacity=0.5,
    latent=(1.0, 0.0),
    original=None,
):
    return Gaussian(
        id=gid,
        center=center,
        covariance=np.eye(3) * std ** 2,
        color=color,
        opacity=opacity,
        semantic_latent=latent,
        original_color=color if original is None else original,
    )


def build_camera(focal=100.0, principal=(50.0, 50.0), width=101, height=101):
    """Identity pose: the camera sits at the origin looking down +z"""
    return Camera(
        rotation=np.eye(3),
        translation=np.zeros(3),
        focal=(focal, focal),
        principal_point=principal,
        width=width,
        height=height,
    )


@pytest.fixture
def make_gaussian():
    return build_gaussian


@pytest.fixture
def make_camera():
    return build_camera


@pytest.fixture(scope="session")
def toy():
    return toy_scenario(0)


@pytest.fixture(scope="session")
def toy_evidence(toy):
    return scenario_evidence(toy)
