import hashlib
import struct
from unittest import TestCase

from rislab.exceptions import ConfigError, MissingConfigKeyError
from rislab.util.core import dbm_to_watt, canonical_json, sha256_digest, derive_seed, require_key, \
    check_enum


class TestUtils(TestCase):
    def test_dbm_conversion(self):
        assert dbm_to_watt(30) == 1.0
        assert abs(dbm_to_watt(-94) - 10 ** -12.4) < 1e-25

    def test_canonical_json_is_key_order_independent(self):
        assert canonical_json({'b': 1, 'a': [1, 2]}) == canonical_json({'a': [1, 2], 'b': 1}) == '{"a":[1,2],"b":1}'
        assert sha256_digest('') == hashlib.sha256(b'').hexdigest()

    def test_derive_seed(self):
        expected = struct.unpack('<Q', hashlib.sha256(struct.pack('<QQ', 7, 3)).digest()[:8])[0]
        assert derive_seed(7, 3) == expected
        assert derive_seed(7, 3) != derive_seed(7, 4)
        assert derive_seed(7, 3) != derive_seed(8, 3)
        assert 0 <= derive_seed(2 ** 64 - 1, 2 ** 64 - 1) < 2 ** 64

    def test_require_key(self):
        assert require_key({'count': 3}, 'count') == 3
        with self.assertRaises(MissingConfigKeyError) as context:
            require_key({}, 'count', 'dataset config')
        assert "'count'" in str(context.exception)
        assert isinstance(context.exception, ConfigError)
        assert isinstance(context.exception, KeyError)

    def test_check_enum(self):
        assert check_enum('fixed', ('fixed', 'random'), 'phase_mode') == 'fixed'
        with self.assertRaises(ConfigError):
            check_enum('other', ('fixed', 'random'), 'phase_mode')

