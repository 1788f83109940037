"""Reference external codec: a real libjpeg round trip through Pillow.

Usable as ``codec.external_cmd``::

    python -m grayplane.pil_jpeg {input} {output} {quality}
"""
import argparse
import io
import sys

import numpy as np


def main(argv=None) -> int:
    from PIL import Image

    from .imagefile import read_image, write_pgm

    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("input")
    parser.add_argument("output")
    parser.add_argument("quality", type=int)
    args = parser.parse_args(argv)

    image = read_image(args.input)
    buf = io.BytesIO()
    Image.fromarray(image, mode="L").save(buf, format="JPEG", quality=args.quality)
    buf.seek(0)
    with Image.open(buf) as decoded:
        write_pgm(args.output, np.array(decoded.convert("L"), dtype=np.uint8))
    return 0


if __name__ == "__main__":
    sys.exit(main())
