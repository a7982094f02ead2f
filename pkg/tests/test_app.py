import os

import pytest
from hypothesis import given, strategies as st

from ginga_drm.app import (
    EntryKind,
    EntryPoint,
    ScanOptions,
    decode_directory_index,
    directory_index_parameter,
    encode_directory_index,
    entry_in_tree,
    parse_entry_point,
    profile_name,
    read_entry_points,
    read_tree,
    scan_application,
    select_entry_point,
    write_application,
)
from ginga_drm.errors import (
    AbsolutePath,
    DataTooLong,
    EmptyApplication,
    EntryPointError,
    ReservedCharacterInName,
    SymlinkRejected,
)
from ginga_drm.mot import encode_parameter

from cases import ENTRY_POINTS_INVALID, ENTRY_POINTS_VALID
from oracles import mot_parameter_oracle


@pytest.mark.parametrize("text", sorted(ENTRY_POINTS_VALID))
def test_valid_entry_points(text):
    ep = parse_entry_point(text)
    assert (ep.file, ep.kind, ep.port) == ENTRY_POINTS_VALID[text]
    assert str(ep) == text


@pytest.mark.parametrize("text", sorted(ENTRY_POINTS_INVALID))
def test_invalid_entry_points(text):
    with pytest.raises(ENTRY_POINTS_INVALID[text]):
        parse_entry_point(text)


segment = st.text(st.characters(blacklist_characters="#/\x00", blacklist_categories=("Cs",)), min_size=1, max_size=6)


@given(st.lists(segment, min_size=1, max_size=3), st.sampled_from(["ncl", "html"]), st.none() | segment)
def test_render_parse_inverse(parts, ext, port):
    if ext == "html":
        port = None
    ep = EntryPoint("/".join(parts) + "." + ext, EntryKind(ext), port)
    assert parse_entry_point(str(ep)) == ep


def test_directory_index_data():
    data = encode_directory_index(1, parse_entry_point("main.ncl"))
    assert data == bytes.fromhex("016D61696E2E6E636C")
    p = directory_index_parameter(1, parse_entry_point("main.ncl"))
    assert encode_parameter(p) == mot_parameter_oracle(0x22, data)
    assert decode_directory_index(data) == (1, parse_entry_point("main.ncl"))


def test_directory_index_decode_validates():
    with pytest.raises(AbsolutePath):
        decode_directory_index(bytes.fromhex("012F612E6E636C"))
    with pytest.raises(EntryPointError):
        decode_directory_index(b"")
    with pytest.raises(EntryPointError):
        decode_directory_index(b"\x01\xff\xfe")


def test_directory_index_cap():
    encode_directory_index(1, parse_entry_point("a" * 122 + ".ncl"))
    with pytest.raises(DataTooLong):
        encode_directory_index(1, parse_entry_point("a" * 123 + ".ncl"))


def test_profile_registry_and_selection():
    assert profile_name(1) == "Ginga Full Receiver Profile"
    assert profile_name(2) is None
    report = read_entry_points([encode_directory_index(1, parse_entry_point("main.ncl")),
                                encode_directory_index(7, parse_entry_point("lite.html")),
                                b"\x03/bad.ncl"])
    assert str(select_entry_point(report, 1)) == "main.ncl"
    assert str(select_entry_point(report, 7)) == "lite.html"
    assert select_entry_point(report, 2) is None
    assert report.unknown_profiles == (7,)
    assert len(report.invalid) == 1


def test_scan_example_tree(tmp_path):
    (tmp_path / "media").mkdir()
    (tmp_path / "main.ncl").write_bytes(b"<ncl/>")
    (tmp_path / "media" / "pic.jpg").write_bytes(b"\xff\xd8")
    objs = scan_application(tmp_path)
    assert [o.content_name for o in objs] == ["main.ncl", "media/pic.jpg"]
    assert [o.transport_id for o in objs] == [1, 2]
    assert entry_in_tree(parse_entry_point("main.ncl"), [o.content_name for o in objs])


def test_scan_rejects_reserved_character(tmp_path):
    (tmp_path / "a#b.txt").write_bytes(b"x")
    with pytest.raises(ReservedCharacterInName):
        scan_application(tmp_path)


def test_scan_empty_directory(tmp_path):
    with pytest.raises(EmptyApplication):
        scan_application(tmp_path)


def test_scan_rejects_symlinks(tmp_path):
    (tmp_path / "a.txt").write_bytes(b"x")
    os.symlink(tmp_path / "a.txt", tmp_path / "b.txt")
    with pytest.raises(SymlinkRejected):
        scan_application(tmp_path)


def test_compression_only_when_smaller(tmp_path):
    (tmp_path / "zeros.bin").write_bytes(bytes(4096))
    (tmp_path / "tiny.txt").write_bytes(b"x")
    objs = {o.content_name: o for o in scan_application(tmp_path, ScanOptions(compress=True))}
    assert objs["zeros.bin"].compressed and not objs["tiny.txt"].compressed
    assert objs["zeros.bin"].body == bytes(4096)


def test_hidden_files(tmp_path):
    (tmp_path / ".hidden").write_bytes(b"h")
    (tmp_path / "main.ncl").write_bytes(b"m")
    assert len(scan_application(tmp_path)) == 2
    assert [o.content_name for o in scan_application(tmp_path, ScanOptions(include_hidden=False))] == ["main.ncl"]


def test_write_and_read_tree(tmp_path):
    files = {"main.ncl": b"m", "a/b/c.txt": b"c"}
    write_application(files, tmp_path)
    assert read_tree(tmp_path) == files
