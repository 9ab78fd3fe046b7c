import json
import struct

from rislab.channel.scenario import Scenario
from rislab.dataset.exceptions import DatasetBadMagicError, DatasetVersionError, DatasetTruncatedError, \
    DatasetDigestMismatchError, DatasetFormatError
from rislab.dataset.format import DatasetHeader, record_dtype, describe_header, MAGIC, FORMAT_VERSION
from rislab.dataset.generator import generate_dataset
from rislab.dataset.reader import DatasetReader, read_dataset
from rislab.tests.util import RISLabTestCase
from rislab.util.core import canonical_json


class TestDatasetFormat(RISLabTestCase):
    def setUp(self) -> None:
        super().setUp()
        self.path = self.tmp_path / 'small.risd'
        self.header = generate_dataset(self.scenario, self.region, 4, 'random_per_sample', 7, self.path)

    def test_record_size(self):
        assert record_dtype(9, 100).itemsize == 18 * 4 + 200 * 4 + 3 * 8 == 896

    def test_header_round_trip(self):
        header, records = read_dataset(self.path)
        assert header == self.header
        assert header.scenario_digest == self.scenario.digest
        assert (header.m, header.n, header.sample_count) == (4, 16, 4)
        assert header.bs_shape == (2, 2)
        assert header.ris_shape == (4, 4)
        assert len(list(records)) == header.sample_count

    def test_default_scenario_header(self):
        header = generate_dataset(Scenario.from_dict({}), self.region, 1, 'random_per_sample', 1,
                                  self.tmp_path / 'default.risd')
        assert (header.m, header.n, header.record_size) == (9, 100, 896)
        assert '9 x 100' in describe_header(header)

    def test_bad_magic(self):
        data = self.path.read_bytes()
        self.path.write_bytes(b'XXXX' + data[4:])
        with self.assertRaises(DatasetBadMagicError):
            DatasetReader(self.path)

    def test_unsupported_version(self):
        data = self.path.read_bytes()
        self.path.write_bytes(data[:4] + struct.pack('<I', FORMAT_VERSION + 1) + data[8:])
        with self.assertRaises(DatasetVersionError):
            DatasetReader(self.path)

    def test_truncated_file(self):
        data = self.path.read_bytes()
        self.path.write_bytes(data[:-10])
        with self.assertRaises(DatasetTruncatedError):
            read_dataset(self.path)

    def test_trailing_bytes(self):
        with open(self.path, 'ab') as file:
            file.write(b'\0')
        with self.assertRaises(DatasetFormatError):
            DatasetReader(self.path)

    def test_digest_mismatch(self):
        document = self.header.to_dict()
        document['scenario_digest'] = '0' * 64
        payload = canonical_json(document).encode('utf-8')
        records = self.path.read_bytes()[-4 * self.header.record_size:]
        self.path.write_bytes(struct.pack('<4sII', MAGIC, FORMAT_VERSION, len(payload)) + payload + records)
        with self.assertRaises(DatasetDigestMismatchError):
            DatasetReader(self.path)

    def test_header_is_canonical_json(self):
        data = self.path.read_bytes()
        length = struct.unpack('<I', data[8:12])[0]
        document = json.loads(data[12:12 + length])
        assert canonical_json(document).encode('utf-8') == data[12:12 + length]
        assert document['region']['exclusion_radius_m'] == 0.5
        assert document['master_seed'] == 7

    def test_invalid_phase_mode(self):
        with self.assertRaises(DatasetFormatError):
            DatasetHeader(scenario={}, m=1, n=1, sample_count=1, region_low=(0, 0, 0), region_high=(1, 1, 1),
                          phase_mode='other', master_seed=0)
