__version__ = '0.1'

from .errors import *
from .streams import (Modality, MODALITIES, SensorStream, RecordingBlock, Segmentation,
                      read_stream, parse_stream, write_stream, serialize_stream, segment_blocks)
from .features import (FeatureMatrix, read_matrix, align_features, align_blocks,
                       standardize, inverse_transform, whiten)
from .assignment import Assignment
from .stats import pearson, correlation_report
from .kmeans import KMeansConfig, KMeansModel, kmeans_fit, kmeans_predict
from .gmm import GmmConfig, GmmModel, gmm_fit, gmm_cluster
from .som import SomConfig, SomModel, som_init, som_train, u_matrix, sample_hits, quantization_error
from .synth import MixtureSpec, ActivitySchedule, gen_mixture, gen_sensor_streams, blobs
from .oracle import bruteforce_kmeans, adjusted_rand_index
