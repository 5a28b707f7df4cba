from .bch import BchCode, bch_decode, bch_encode, dvbs2_bch
from .chain import FecChain, WaterfallPoint, crossing_es_n0_db, fec_decode_chain, fec_encode_chain, waterfall
from .ldpc import DecodeResult, LdpcCode, dvbs2_code, ldpc_decode, ldpc_encode
