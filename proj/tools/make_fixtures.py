# Copyright 2026 The Compx Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Generates the bundled test images and masks under data/images.

Deterministic: fixed seeds, no external inputs. Rerun after editing and
commit the outputs.
"""

import pathlib

import numpy as np
from PIL import Image, ImageDraw, ImageFilter

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "images"


def smooth_noise(rng, h, w, scale, sigma):
    small = rng.normal(0.0, 1.0, (h // scale + 2, w // scale + 2))
    img = Image.fromarray(((small - small.min()) / np.ptp(small) * 255).astype(np.uint8))
    img = img.resize((w, h), Image.BICUBIC).filter(ImageFilter.GaussianBlur(sigma))
    return np.asarray(img, dtype=np.float64) / 255.0


def scene(rng, w, h, noise=1.0):
    """Sky-to-ground gradient, soft clouds, and a few solid objects."""
    y = np.linspace(0.0, 1.0, h)[:, None]
    x = np.linspace(0.0, 1.0, w)[None, :]
    clouds = smooth_noise(rng, h, w, 32, 6)
    r = 90 + 80 * y + 40 * clouds + 10 * x
    g = 130 + 50 * y + 40 * clouds
    b = 200 - 90 * y + 30 * clouds
    img = np.stack([r, g, b], axis=-1)
    img += rng.normal(0.0, noise, img.shape)
    return np.clip(img, 0, 255).astype(np.uint8)


def draw_objects(img, boxes, colors):
    pil = Image.fromarray(img)
    draw = ImageDraw.Draw(pil)
    for (x0, y0, x1, y1), color in zip(boxes, colors):
        draw.ellipse((x0, y0, x1, y1), fill=color)
    return np.asarray(pil)


def object_mask(w, h, boxes, values):
    mask = Image.new("L", (w, h), 0)
    draw = ImageDraw.Draw(mask)
    for box, v in zip(boxes, values):
        draw.ellipse(box, fill=v)
    return mask


def save(arr, name, mode=None):
    Image.fromarray(arr, mode).save(OUT / name)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20240601)

    # 512x512 scene with two foreground birds; mask values 1 and 2.
    boxes = [(120, 170, 250, 390), (290, 150, 420, 380)]
    base = scene(rng, 512, 512, noise=0.0)
    img = draw_objects(base, boxes, [(200, 40, 30), (40, 160, 60)])
    img = np.clip(img + smooth_noise(rng, 512, 512, 16, 3)[..., None] * 12 - 6, 0, 255)
    save(img.astype(np.uint8), "birds_512.png")
    object_mask(512, 512, boxes, [1, 2]).save(OUT / "birds_512_mask.png")

    # 96x72 shapes on a gradient.
    boxes = [(10, 10, 40, 50), (50, 20, 90, 60)]
    img = draw_objects(scene(rng, 96, 72), boxes, [(250, 220, 30), (20, 20, 160)])
    save(img, "shapes_96x72.png")
    object_mask(96, 72, boxes, [100, 200]).save(OUT / "shapes_96x72_mask.png")

    # Non-multiple-of-8 sizes.
    save(scene(rng, 77, 53), "odd_77x53.png")
    Image.fromarray(scene(rng, 40, 100)).save(OUT / "tall_40x100.ppm")
    save(scene(rng, 200, 150), "landscape_200x150.png")

    # Grayscale.
    gray = (smooth_noise(rng, 90, 120, 8, 2) * 200 + 20).astype(np.uint8)
    Image.fromarray(gray, "L").save(OUT / "gray_120x90.pgm")

    # High-detail texture.
    tex = (rng.random((128, 128, 3)) * 60 + smooth_noise(rng, 128, 128, 4, 1)[..., None] * 180)
    save(np.clip(tex, 0, 255).astype(np.uint8), "texture_128.png")

    # Flat-ish 64x64 with a bright square.
    flat = np.full((64, 64, 3), 60, np.uint8)
    flat[20:36, 24:40] = 230
    save(flat, "square_64.png")


if __name__ == "__main__":
    main()
