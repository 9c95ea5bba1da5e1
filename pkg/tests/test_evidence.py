import dataclasses

import numpy as np
import pytest

from evidence import (
    EditedViewEvidence,
    EditSpec,
    EvidenceError,
    EvidenceFormatError,
    EvidenceStorage,
    NoVisibleTargetError,
    appearance_descriptor,
    generate_synthetic_evidence,
    load_evidence,
    store_evidence,
)
from scene import FOOTPRINT_MIN, Camera, footprint_raster, render_view
from scene.presets import toy_target_semantic


def single_target_spec(**overrides):
    spec = EditSpec(
        target_region=frozenset({11}),
        target_semantic=toy_target_semantic(),
        target_color=np.array([0.9, 0.2, 0.1]),
    )
    return dataclasses.replace(spec, **overrides)


class TestSyntheticEvidence:

    def test_noiseless_single_target(self, toy):
        camera = toy.cameras[0]
        evidence = generate_synthetic_evidence(toy.scene, camera, single_target_spec())
        footprint = footprint_raster(render_view(toy.scene, camera), [11])
        np.testing.assert_array_equal(evidence.attention, footprint)

        inside = footprint > FOOTPRINT_MIN
        np.testing.assert_allclose(
            evidence.semantic_features[inside],
            np.broadcast_to(toy_target_semantic(), (int(inside.sum()), 16)),
            rtol=1e-6,
        )
        assert not evidence.semantic_features[~inside].any()

    def test_attention_mass_matches_footprint(self, toy):
        camera = toy.cameras[1]
        render = render_view(toy.scene, camera)
        evidence = generate_synthetic_evidence(toy.scene, camera, single_target_spec(), render=render)
        expected = render.footprints[11].raw_mass
        assert abs(float(evidence.attention.sum()) - expected) <= 1e-9

    def test_deterministic_given_seed(self, toy):
        spec = single_target_spec(attention_noise_sigma=0.1, feature_noise_sigma=0.1, seed=7)
        first = generate_synthetic_evidence(toy.scene, toy.cameras[2], spec, view_index=2)
        second = generate_synthetic_evidence(toy.scene, toy.cameras[2], spec, view_index=2)
        for name in ("edited_image", "attention", "semantic_features", "appearance_features"):
            np.testing.assert_array_equal(getattr(first, name), getattr(second, name))

    def test_attention_noise_is_zero_mean(self, toy):
        camera = toy.cameras[0]
        sigma = 0.1
        clean = footprint_raster(render_view(toy.scene, camera), [11])
        samples = [
            generate_synthetic_evidence(toy.scene, camera, single_target_spec(attention_noise_sigma=sigma, seed=s)).attention
            for s in range(10)
        ]
        mean = np.mean(samples, axis=0)
        strong = clean > 0.5
        assert strong.any()
        assert np.all(np.abs(mean[strong] - clean[strong]) <= 4 * sigma / np.sqrt(10))

    def test_mask_marks_target_footprint(self, toy):
        camera = toy.cameras[0]
        evidence = generate_synthetic_evidence(toy.scene, camera, single_target_spec(with_mask=True))
        footprint = footprint_raster(render_view(toy.scene, camera), [11])
        np.testing.assert_array_equal(evidence.mask, footprint > FOOTPRINT_MIN)

    def test_spill_tints_outside_the_footprint(self, toy):
        camera = toy.cameras[0]
        clean = generate_synthetic_evidence(toy.scene, camera, single_target_spec())
        spilled = generate_synthetic_evidence(toy.scene, camera, single_target_spec(spill_strength=0.6))
        assert not np.array_equal(clean.edited_image, spilled.edited_image)
        np.testing.assert_array_equal(clean.attention, spilled.attention)

    def test_unknown_target(self, toy):
        with pytest.raises(EvidenceError, match="not in scene"):
            generate_synthetic_evidence(toy.scene, toy.cameras[0], single_target_spec(target_region=frozenset({99})))

    def test_no_visible_target(self, toy):
        away = Camera.look_at((0.0, 0.0, 10.0), (0.0, 0.0, 20.0), 48.0, 32, 32)
        with pytest.raises(NoVisibleTargetError):
            generate_synthetic_evidence(toy.scene, away, single_target_spec())


class TestEvidenceValidation:

    def _rasters(self, attention):
        return dict(
            edited_image=np.zeros((4, 4, 3)),
            attention=attention,
            semantic_features=np.zeros((4, 4, 2)),
            appearance_features=np.zeros((4, 4, 6)),
        )

    def test_negative_attention(self):
        attention = np.ones((4, 4))
        attention[0, 0] = -1.0
        with pytest.raises(EvidenceError):
            EditedViewEvidence(**self._rasters(attention))

    def test_all_zero_attention(self):
        with pytest.raises(EvidenceError):
            EditedViewEvidence(**self._rasters(np.zeros((4, 4))))

    def test_shape_mismatch(self):
        with pytest.raises(EvidenceError):
            EditedViewEvidence(**self._rasters(np.ones((3, 4))))

    def test_edit_spec_needs_a_target(self):
        with pytest.raises(EvidenceError):
            single_target_spec(target_region=frozenset())


class TestAppearanceDescriptor:

    def test_constant_image(self):
        image = np.broadcast_to(np.array([0.2, 0.5, 0.7]), (5, 6, 3))
        descriptor = appearance_descriptor(image, 8)
        assert descriptor.shape == (5, 6, 8)
        np.testing.assert_allclose(descriptor[:, :, :3], image, atol=1e-12)
        assert not descriptor[:, :, 3:].any()

    def test_gradient_channel(self):
        image = np.zeros((3, 5, 3))
        image[:, :, 0] = np.arange(5)[None, :]
        descriptor = appearance_descriptor(image, 6)
        # central difference of a unit ramp, away from the border
        np.testing.assert_allclose(descriptor[1, 2, 3], 1.0)
        assert descriptor[1, 2, 4] == 0.0


class TestEvidenceStorage:

    def test_round_trip_rounds_to_float32(self, tmp_path, toy):
        spec = single_target_spec(attention_noise_sigma=0.05, feature_noise_sigma=0.05, with_mask=True)
        evidence = generate_synthetic_evidence(toy.scene, toy.cameras[0], spec)
        store_evidence(evidence, tmp_path / "view")
        loaded = load_evidence(tmp_path / "view")
        assert loaded.attention.dtype == np.float64
        for name in ("edited_image", "attention", "semantic_features", "appearance_features"):
            np.testing.assert_array_equal(getattr(loaded, name), getattr(evidence, name).astype(np.float32))
        np.testing.assert_array_equal(loaded.mask, evidence.mask)

        store_evidence(loaded, tmp_path / "again")
        reloaded = load_evidence(tmp_path / "again")
        for name in ("edited_image", "attention", "semantic_features", "appearance_features", "mask"):
            np.testing.assert_array_equal(getattr(reloaded, name), getattr(loaded, name))

    def test_mask_absent(self, tmp_path, toy):
        evidence = generate_synthetic_evidence(toy.scene, toy.cameras[0], single_target_spec())
        store_evidence(evidence, tmp_path / "view")
        assert load_evidence(tmp_path / "view").mask is None

    def test_truncated_payload(self, tmp_path, toy):
        evidence = generate_synthetic_evidence(toy.scene, toy.cameras[0], single_target_spec())
        store_evidence(evidence, tmp_path / "view")
        payload = tmp_path / "view" / "attention.bin"
        payload.write_bytes(payload.read_bytes()[:-8])
        with pytest.raises(EvidenceFormatError, match="shape mismatch"):
            load_evidence(tmp_path / "view")

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(EvidenceFormatError):
            load_evidence(tmp_path)

    def test_multi_view_layout(self, tmp_path, toy, toy_evidence):
        storage = EvidenceStorage(tmp_path / "evidence")
        for v, (evidence, camera) in enumerate(zip(toy_evidence, toy.cameras)):
            storage.save(v, evidence, camera)
        assert storage.views() == [0, 1, 2]
        evidences, cameras = storage.load_all()
        assert len(evidences) == 3
        np.testing.assert_array_equal(cameras[2].rotation, toy.cameras[2].rotation)
        np.testing.assert_array_equal(evidences[1].attention, toy_evidence[1].attention.astype(np.float32))


class TestEditSpecFile:

    def test_load_yaml(self, tmp_path):
        path = tmp_path / "spec.yaml"
        path.write_text(
            "target_region: [8, 9]\n"
            "target_semantic: [1.0, 0.0]\n"
            "target_color: [0.9, 0.2, 0.1]\n"
            "spill_strength: 0.5\n"
        )
        spec = EditSpec.load(path)
        assert spec.target_region == frozenset({8, 9})
        assert spec.spill_strength == 0.5

    def test_unknown_field(self):
        with pytest.raises(EvidenceError):
            EditSpec.from_dict({"target_region": [1], "target_semantic": [1.0], "target_color": [0, 0, 0], "hue": 3})
