import sys

import pytest

from interax import EvaluationError, attach_external, make_majority, stv_exact


class TestProtocol:
    def test_majority_child_matches_builtin(self, majority_child_command):
        with attach_external(majority_child_command, 3) as ext:
            builtin = make_majority(3)
            for mask in range(8):
                assert ext.value(mask) == builtin.value(mask)

    def test_indices_bit_identical_to_builtin(self, majority_child_command):
        with attach_external(majority_child_command, 3) as ext:
            got = stv_exact(ext, 2)
        want = stv_exact(make_majority(3), 2)
        assert got.values == want.values

    def test_memoized_single_round_trip(self):
        # child answers with a running counter: a repeated query would
        # return a different number, so equality proves memoization
        prog = ("import sys\n"
                "count = 0\n"
                "for line in sys.stdin:\n"
                "    line = line.strip()\n"
                "    if line.startswith('INIT'): print('OK', flush=True)\n"
                "    elif line == 'QUIT': break\n"
                "    else:\n"
                "        count += 1\n"
                "        print(float(count), flush=True)\n")
        with attach_external(f'{sys.executable} -c "{prog}"', 3) as ext:
            first = ext.value([0, 2])
            other = ext.value([1])
            assert ext.value([0, 2]) == first
            assert other != first

    def test_non_numeric_reply(self):
        prog = ("import sys\n"
                "for line in sys.stdin:\n"
                "    line = line.strip()\n"
                "    if line.startswith('INIT'): print('OK', flush=True)\n"
                "    elif line == 'QUIT': break\n"
                "    else: print('abc', flush=True)\n")
        with attach_external(f'{sys.executable} -c "{prog}"', 3) as ext:
            with pytest.raises(EvaluationError, match="abc"):
                ext.value([0])

    def test_child_exit_mid_session(self):
        prog = ("import sys\n"
                "sys.stdin.readline()\n"
                "print('OK', flush=True)\n")
        with attach_external(f'{sys.executable} -c "{prog}"', 3) as ext:
            with pytest.raises(EvaluationError, match="exited"):
                ext.value([0])

    def test_bad_handshake(self):
        prog = "print('NOPE', flush=True)"
        with pytest.raises(EvaluationError, match="handshake"):
            attach_external(f"{sys.executable} -c \"{prog}\"", 3)

    def test_missing_command(self):
        with pytest.raises(EvaluationError):
            attach_external("/definitely/not/a/real/binary", 3)

    def test_query_encoding_is_positional(self, majority_child_command):
        # character i of the query is player i: check an asymmetric subset
        with attach_external(majority_child_command, 5) as ext:
            assert ext.value([0, 1, 2]) == 1.0
            assert ext.value([4]) == 0.0
