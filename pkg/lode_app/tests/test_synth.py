import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase, override_settings

from lode_app.camera import Intrinsics, Ray, look_at
from lode_app.exceptions import InputFormatError, MaskFormatError
from lode_app.mask import Mask, save_mask
from lode_app.synth import (
    DepthMap,
    NoiseParams,
    RevolutionShape,
    load_depth,
    load_noise,
    load_shape,
    perturb_mask,
    ray_shape_intersect,
    render,
    render_depth,
    render_mask,
    save_depth,
)
from lode_app.tests.fixtures import CYLINDER, SMALL_INTRINSICS, cylinder_scene, fixture_cameras, write_json

CUP = RevolutionShape(axis_base=np.zeros(3), profile=np.array([[0.0, 28.0], [95.0, 42.0]]))


def ray(origin, direction):
    direction = np.asarray(direction, dtype=float)
    return Ray(origin=np.asarray(origin, dtype=float), direction=direction / np.linalg.norm(direction))


class ShapeTests(SimpleTestCase):
    def test_ground_truth(self):
        bottle = RevolutionShape(axis_base=(0, 0, 0), profile=[[0, 35], [150, 35], [175, 15], [210, 13]])
        self.assertEqual((bottle.true_width, bottle.true_height), (70.0, 210.0))

    def test_profile_must_start_at_zero(self):
        with self.assertRaises(InputFormatError):
            RevolutionShape(axis_base=(0, 0, 0), profile=[[1, 10], [2, 10]])

    def test_heights_strictly_increase(self):
        with self.assertRaises(InputFormatError):
            RevolutionShape(axis_base=(0, 0, 0), profile=[[0, 10], [5, 10], [5, 12]])

    def test_negative_radius(self):
        with self.assertRaises(InputFormatError):
            RevolutionShape(axis_base=(0, 0, 0), profile=[[0, 10], [5, -1]])

    def test_shape_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            good = write_json(Path(tmp) / "s.json", {"axis_base": [1, 2, 3], "profile": [[0, 10], [20, 5]]})
            bad = write_json(Path(tmp) / "b.json", {"axis_base": [1, 2], "profile": [[0, 10], [20, 5]]})
            shape = load_shape(good)
            with self.assertRaises(InputFormatError):
                load_shape(bad)
        np.testing.assert_array_equal(shape.axis_base, (1, 2, 3))
        self.assertEqual(shape.true_height, 20.0)

    def test_overflowing_radius_is_rejected(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "s.json"
            path.write_text('{"axis_base": [0, 0, 0], "profile": [[0, 1e400], [20, 5]]}', encoding="utf-8")
            with self.assertRaisesMessage(InputFormatError, "parse failure"):
                load_shape(path)

    def test_noise_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_json(Path(tmp) / "n.json", {"boundary_flip_prob": 0.25, "dilation_px": -2, "seed": 5})
            self.assertEqual(load_noise(path), NoiseParams(0.25, -2, 5))
            out_of_range = write_json(Path(tmp) / "x.json", {"boundary_flip_prob": 1.5})
            with self.assertRaises(InputFormatError):
                load_noise(out_of_range)

    def test_negative_seed(self):
        with self.assertRaisesMessage(InputFormatError, "seed must be non-negative"):
            NoiseParams(seed=-1)


class RayIntersectTests(SimpleTestCase):
    def test_axial_top_disk(self):
        self.assertAlmostEqual(ray_shape_intersect(ray((0, 0, 200), (0, 0, -1)), CYLINDER), 80.0, places=9)

    def test_lateral_hit(self):
        self.assertAlmostEqual(ray_shape_intersect(ray((400, 0, 60), (-1, 0, 0)), CYLINDER), 360.0, places=9)

    def test_grazing_miss(self):
        self.assertIsNone(ray_shape_intersect(ray((400, 40.001, 60), (-1, 0, 0)), CYLINDER))

    def test_pointing_away(self):
        self.assertIsNone(ray_shape_intersect(ray((400, 0, 60), (1, 0, 0)), CYLINDER))

    def test_conical_frustum(self):
        radius = 28.0 + 14.0 * 50.0 / 95.0
        self.assertAlmostEqual(ray_shape_intersect(ray((400, 0, 50), (-1, 0, 0)), CUP), 400.0 - radius, places=9)

    def test_bottom_disk_from_below(self):
        self.assertAlmostEqual(ray_shape_intersect(ray((5, 5, -30), (0, 0, 1)), CUP), 30.0, places=9)

    def test_neck_cap(self):
        bottle = RevolutionShape(axis_base=(0, 0, 0), profile=[[0, 35], [150, 35], [175, 15], [210, 13]])
        self.assertAlmostEqual(ray_shape_intersect(ray((0, 0, 300), (0, 0, -1)), bottle), 90.0, places=9)
        # above the shoulder, beside the neck: lands on the shoulder cone
        self.assertAlmostEqual(ray_shape_intersect(ray((25, 0, 300), (0, 0, -1)), bottle), 300.0 - 162.5, places=9)


class RenderTests(SimpleTestCase):
    def test_camera_looking_away(self):
        camera = look_at("away", (400.0, 0.0, 60.0), (800.0, 0.0, 60.0), SMALL_INTRINSICS)
        self.assertEqual(render_mask(camera, CYLINDER).mass, 0)

    def test_silhouette_matches_tangent_projection(self):
        mask = cylinder_scene()[0]
        cols = np.flatnonzero(mask.data[300])
        half_width = 600.0 * math.tan(math.asin(40.0 / 400.0))
        self.assertLessEqual(abs(cols.min() - (640.0 - half_width)), 1.0)
        self.assertLessEqual(abs(cols.max() - (640.0 + half_width)), 1.0)

    def test_symmetric_about_axis_column(self):
        mask = cylinder_scene()[0]
        np.testing.assert_array_equal(mask.data[:, 540:640][:, ::-1], mask.data[:, 641:741])

    def test_mask_and_depth_agree(self):
        for mask, depth in zip(cylinder_scene()[:2], cylinder_scene()[2:]):
            np.testing.assert_array_equal(depth.data > 0, mask.data == 1)

    def test_depth_lower_bound(self):
        depth = cylinder_scene()[2]
        self.assertGreaterEqual(depth.data[depth.data > 0].min(), 400.0 - 40.0 - 1e-9)
        self.assertEqual(depth.data[0, 0], 0.0)

    def test_top_disk_depth(self):
        top = look_at(
            "top", (0.0, 0.0, 400.0), (0.0, 0.0, 0.0),
            Intrinsics(fx=300.0, fy=300.0, cx=80.0, cy=60.0, width=161, height=121), up=(0.0, 1.0, 0.0),
        )
        depth = render_depth(top, CYLINDER)
        self.assertAlmostEqual(depth.data[60, 80], 280.0, places=9)

    def test_backdrop(self):
        camera = fixture_cameras("small")[0]
        mask, depth = render(camera, CYLINDER, backdrop_mm=1000.0)
        self.assertTrue(np.all(depth.data[mask.data == 0] == 1000.0))
        self.assertTrue(np.all(depth.data[mask.data == 1] < 1000.0))

    def test_zero_radius_profile(self):
        flat = RevolutionShape(axis_base=(0, 0, 0), profile=[[0, 0], [100, 0]])
        mask, depth = render(fixture_cameras("small")[0], flat)
        self.assertEqual(mask.mass, 0)
        self.assertFalse(depth.data.any())

    def test_independent_of_chunking_and_workers(self):
        camera = fixture_cameras("small")[0]
        reference = render(camera, CUP)
        with override_settings(LODE={"WORKERS": 4, "RENDER_CHUNK_ROWS": 7}):
            chunked = render(camera, CUP)
        np.testing.assert_array_equal(reference[0].data, chunked[0].data)
        np.testing.assert_array_equal(reference[1].data, chunked[1].data)

    def test_silhouette_error_stays_within_a_pixel(self):
        half_angle = math.tan(math.asin(40.0 / 400.0))
        for focal in (75.0, 150.0, 300.0):
            intrinsics = Intrinsics(fx=focal, fy=focal, cx=80.0, cy=60.0, width=161, height=121)
            camera = look_at("c", (400.0, 0.0, 60.0), (0.0, 0.0, 60.0), intrinsics)
            cols = np.flatnonzero(render_mask(camera, CYLINDER).data[60])
            observed = (cols.max() - cols.min()) / 2.0
            self.assertLessEqual(abs(observed - focal * half_angle), 1.0)


class DepthFileTests(SimpleTestCase):
    def test_round_and_saturate(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "d.pgm"
            save_depth(DepthMap(np.array([[0.0, 12.4], [360.7, 70000.0]])), path)
            loaded = load_depth(path)
        self.assertEqual(loaded.data.tolist(), [[0.0, 12.0], [361.0, 65535.0]])

    def test_eight_bit_depth_is_rejected(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "m.pgm"
            save_mask(Mask.full(2, 2), path)
            with self.assertRaisesMessage(MaskFormatError, "unsupported maxval"):
                load_depth(path)


class PerturbTests(SimpleTestCase):
    def test_identity(self):
        mask = cylinder_scene("small")[0]
        np.testing.assert_array_equal(perturb_mask(mask, NoiseParams()).data, mask.data)

    def test_dilation_grows_a_block(self):
        data = np.zeros((7, 7), dtype=np.uint8)
        data[3, 3] = 1
        grown = perturb_mask(Mask(data), NoiseParams(dilation_px=1)).data
        expected = np.zeros((7, 7), dtype=np.uint8)
        expected[2:5, 2:5] = 1
        np.testing.assert_array_equal(grown, expected)

    def test_dilation_clips_at_border(self):
        data = np.zeros((4, 4), dtype=np.uint8)
        data[0, 0] = 1
        grown = perturb_mask(Mask(data), NoiseParams(dilation_px=1)).data
        self.assertEqual(grown.sum(), 4)
        self.assertTrue(np.all(grown[:2, :2] == 1))

    def test_erosion(self):
        data = np.zeros((5, 5), dtype=np.uint8)
        data[1:4, 1:4] = 1
        eroded = perturb_mask(Mask(data), NoiseParams(dilation_px=-1)).data
        self.assertEqual(np.argwhere(eroded).tolist(), [[2, 2]])

    def test_erosion_keeps_pixels_touching_the_border(self):
        eroded = perturb_mask(Mask.full(4, 4), NoiseParams(dilation_px=-1)).data
        self.assertTrue(np.all(eroded == 1))

    def test_certain_flip_inverts_the_boundary_band(self):
        data = np.zeros((9, 9), dtype=np.uint8)
        data[3:6, 3:6] = 1
        flipped = perturb_mask(Mask(data), NoiseParams(boundary_flip_prob=1.0, seed=4)).data
        expected = np.zeros((9, 9), dtype=np.uint8)
        expected[2:7, 2:7] = 1
        expected[3:6, 3:6] = 0
        expected[4, 4] = 1
        np.testing.assert_array_equal(flipped, expected)

    def test_seeded_noise_is_reproducible(self):
        mask = cylinder_scene("small")[0]
        noise = NoiseParams(boundary_flip_prob=0.5, dilation_px=1, seed=9)
        first = perturb_mask(mask, noise)
        np.testing.assert_array_equal(first.data, perturb_mask(mask, noise).data)
        other = perturb_mask(mask, NoiseParams(boundary_flip_prob=0.5, dilation_px=1, seed=10))
        self.assertFalse(np.array_equal(first.data, other.data))

    def test_flips_stay_near_the_boundary(self):
        mask = cylinder_scene("small")[0]
        flipped = perturb_mask(mask, NoiseParams(boundary_flip_prob=0.7, seed=1)).data
        changed = np.argwhere(flipped != mask.data)
        self.assertGreater(len(changed), 0)
        for row, col in changed:
            window = mask.data[max(row - 1, 0):row + 2, max(col - 1, 0):col + 2]
            self.assertTrue(window.min() != window.max())
