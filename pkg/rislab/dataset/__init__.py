from rislab.dataset.format import DatasetHeader, record_dtype, describe_header, MAGIC, FORMAT_VERSION
from rislab.dataset.generator import SamplingRegion, SampleRecord, simulate_sample, generate_dataset
from rislab.dataset.reader import DatasetReader, Fingerprints, read_dataset, load_fingerprints, split_indices, \
    split_dataset
