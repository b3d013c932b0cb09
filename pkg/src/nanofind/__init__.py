"""Recursive threshold/morphology detection of nanoparticles in SEM images."""

__version__ = "0.1.0"

from .evaluate import GroundTruth, MatchReport, match, pearson
from .labeling import component_sizes, filter_small, label_components
from .morphology import cross3, dilate, erode, square3
from .pipeline import DetectConfig, DetectResult, detect, detect_batch, mask_out
from .raster import histogram, load_pgm, mask_to_image, write_pgm
from .regionprops import Particle, measure, to_csv
from .synthgen import SynthConfig, generate, truth_to_ground_truth
from .threshold import ThresholdResult, apply_threshold, otsu
from .watershed import distance_transform, find_markers, watershed_segment
