from .md2 import encode_md2, group_frames, load_md2, parse_md2
from .obj import dump_obj, load_mtl, load_obj, parse_mtl, parse_obj
from .ppm import ImageBuffer, decode_ppm, encode_ppm, read_ppm, write_ppm
from .registry import LoaderRegistry, default_registry, load
from .skin import dump_skin, load_skin, parse_skin

__all__ = [
    "encode_md2", "group_frames", "load_md2", "parse_md2", "dump_obj", "load_mtl", "load_obj", "parse_mtl",
    "parse_obj", "ImageBuffer", "decode_ppm", "encode_ppm", "read_ppm", "write_ppm", "LoaderRegistry",
    "default_registry", "load", "dump_skin", "load_skin", "parse_skin",
]
