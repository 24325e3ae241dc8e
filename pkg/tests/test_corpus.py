"""Tests for manifests, vocabulary, PPM images and the synthetic corpus."""
import numpy as np
import pytest
from pydantic import ValidationError

from src.corpus.dataset import encode_samples
from src.corpus.images import ImageTensor, load_image, preprocess_image, save_image
from src.corpus.manifest import read_manifest, require_labels, strip_labels, write_manifest
from src.corpus.schemas import CLASS_NAMES, NUM_CLASSES, Sample, SynthConfig
from src.corpus.synth import FINGERPRINT_CHANNEL, fingerprint, synth_corpus, synth_image
from src.corpus.vocab import CLS_ID, PAD_ID, UNK_ID, Vocab, build_vocab, tokenize
from src.errors import DataFormatError, NumericError
from src.model.network import extract_patches


def _sample(i, caption="a dog", label_a=1, label_b=1):
    return Sample(id=f"x{i}", caption=caption, image_path=f"images/x{i}.ppm", label_a=label_a, label_b=label_b)


# ---------------------------------------------------------------- samples / manifest

def test_sample_label_consistency():
    """label_a=0 forces label_b=0 and label_a=1 forbids label_b=0."""
    with pytest.raises(ValidationError):
        Sample(id="a", caption="", image_path="a.ppm", label_a=0, label_b=3)
    with pytest.raises(ValidationError):
        Sample(id="a", caption="", image_path="a.ppm", label_a=1, label_b=0)
    with pytest.raises(ValidationError):
        Sample(id="a", caption="", image_path="a.ppm", label_a=1)

    unlabeled = Sample(id="a", caption="", image_path="a.ppm")
    assert not unlabeled.is_labeled


def test_manifest_roundtrip(tmp_path):
    """1000 rows survive write then read, including commas and quotes in captions."""
    samples = []
    for i in range(1000):
        cls = i % NUM_CLASSES
        caption = f'a "quoted", caption {i}' if i % 7 == 0 else f"caption {i}"
        samples.append(Sample(id=f"s{i}", caption=caption, image_path=f"images/s{i}.ppm",
                              label_a=int(cls > 0), label_b=cls))
    samples.append(Sample(id="u0", caption="no labels", image_path="images/u0.ppm"))

    path = tmp_path / "manifest.csv"
    write_manifest(samples, path)
    assert read_manifest(path) == samples


def test_manifest_rejects_inconsistent_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,caption,image_path,label_a,label_b\nr1,a cat,img.ppm,0,3\n", encoding="utf-8")
    with pytest.raises(DataFormatError, match="line 2"):
        read_manifest(path)


@pytest.mark.parametrize("content", [
    "id,caption,path,label_a,label_b\n",
    "id,caption,image_path,label_a,label_b\nr1,a cat,img.ppm,1\n",
    "id,caption,image_path,label_a,label_b\nr1,a cat,img.ppm,x,1\n",
    "id,caption,image_path,label_a,label_b\nr1,a,a.ppm,1,2\nr1,b,b.ppm,1,2\n",
])
def test_manifest_format_errors(tmp_path, content):
    path = tmp_path / "bad.csv"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(DataFormatError):
        read_manifest(path)


def test_strip_and_require_labels():
    samples = [_sample(0), _sample(1, label_a=0, label_b=0)]
    stripped = strip_labels(samples)
    assert all(not s.is_labeled for s in stripped)
    assert [s.id for s in stripped] == ["x0", "x1"]
    require_labels(samples)
    with pytest.raises(DataFormatError):
        require_labels(stripped)


# ---------------------------------------------------------------- vocabulary

def test_build_vocab_orders_by_frequency_then_token():
    vocab = build_vocab([_sample(0, "a dog"), _sample(1, "a cat")], max_size=8)
    assert vocab.token_to_id == {"[PAD]": 0, "[UNK]": 1, "[CLS]": 2, "a": 3, "cat": 4, "dog": 5}


def test_build_vocab_caps_size_and_handles_empty_captions():
    assert len(build_vocab([_sample(0, "")])) == 3
    vocab = build_vocab([_sample(0, "b b c c c d a")], max_size=5)
    assert vocab.tokens[3:] == ["c", "b"]

    manifest = [_sample(i, f"word{i % 4} shared") for i in range(12)]
    assert build_vocab(manifest) == build_vocab(list(manifest))


def test_build_vocab_rejects_empty_manifest():
    with pytest.raises(DataFormatError):
        build_vocab([])


def test_vocab_dict_roundtrip():
    vocab = build_vocab([_sample(0, "the quick brown fox")], max_size=16)
    assert Vocab.from_dict(vocab.to_dict()) == vocab


def test_tokenize_examples():
    vocab = Vocab(["a", "dog"], max_size=8)

    seq = tokenize("A dog runs", vocab, seq_len=6)
    assert seq.ids.tolist() == [CLS_ID, 3, 4, UNK_ID, PAD_ID, PAD_ID]
    assert seq.mask.tolist() == [1, 1, 1, 1, 0, 0]

    empty = tokenize("", vocab, seq_len=4)
    assert empty.ids.tolist() == [CLS_ID, 0, 0, 0]
    assert empty.mask.tolist() == [1, 0, 0, 0]

    long = tokenize(" ".join(["dog"] * 11), vocab, seq_len=6)
    assert len(long.ids) == 6
    assert long.mask.tolist() == [1] * 6


# ---------------------------------------------------------------- images

def test_load_single_red_pixel(tmp_path):
    path = tmp_path / "red.ppm"
    path.write_bytes(b"P6\n1 1\n255\n" + bytes([255, 0, 0]))
    img = load_image(path)
    assert img.data.shape == (3, 1, 1)
    assert img.data[:, 0, 0].tolist() == [255.0, 0.0, 0.0]


def test_load_header_with_comment(tmp_path):
    path = tmp_path / "c.ppm"
    path.write_bytes(b"P6\n# made by hand\n2 1\n255\n" + bytes(range(6)))
    assert load_image(path).data[:, 0, 1].tolist() == [3.0, 4.0, 5.0]


@pytest.mark.parametrize("raw", [
    b"P3\n1 1\n255\n255 0 0\n",
    b"P6\n1 1\n65535\n" + bytes(6),
    b"P6\n2 2\n255\n" + bytes(5),
    b"P6\n1 1\n255\n" + bytes(4),
    b"GIF89a",
])
def test_load_rejects_bad_files(tmp_path, raw):
    path = tmp_path / "bad.ppm"
    path.write_bytes(raw)
    with pytest.raises(DataFormatError):
        load_image(path)


def test_save_load_roundtrip_is_byte_identical(tmp_path):
    cfg = SynthConfig(n_samples=6, height=8, width=8)
    data = synth_image("a red dog", 3, cfg, np.random.default_rng(0))
    first, second = tmp_path / "a.ppm", tmp_path / "b.ppm"
    save_image(data, first)
    save_image(load_image(first), second)
    assert first.read_bytes() == second.read_bytes()


def test_preprocess_constant_image_centers_to_zero():
    img = ImageTensor(np.full((3, 4, 4), 127.5))
    out = preprocess_image(img, target=(4, 4), mean=0.5, std=0.5)
    np.testing.assert_array_equal(out.data, np.zeros((3, 4, 4)))


def test_preprocess_identity_resize_keeps_values():
    data = np.random.default_rng(0).uniform(0, 255, size=(3, 8, 8))
    out = preprocess_image(ImageTensor(data), target=(8, 8), mean=0.0, std=1.0)
    np.testing.assert_allclose(out.data, data / 255.0, rtol=0, atol=1e-15)


def test_preprocess_bilinear_averages_block():
    data = np.zeros((3, 2, 2))
    data[:, 1, :] = 255.0
    out = preprocess_image(ImageTensor(data), target=(1, 1), mean=0.0, std=1.0)
    assert out.data.shape == (3, 1, 1)
    np.testing.assert_allclose(out.data * 255.0, 127.5)


def test_preprocess_errors():
    with pytest.raises(DataFormatError):
        preprocess_image(ImageTensor(np.zeros((3, 2, 2))), target=(2, 2), std=0.0)
    bad = np.zeros((3, 2, 2))
    bad[0, 0, 0] = np.nan
    with pytest.raises(NumericError):
        preprocess_image(ImageTensor(bad), target=(2, 2))


# ---------------------------------------------------------------- synthetic corpus

def test_synth_is_deterministic(tmp_path):
    cfg = SynthConfig(n_samples=12, height=8, width=8, seed=3)
    first = synth_corpus(cfg, tmp_path / "a")
    second = synth_corpus(cfg, tmp_path / "b")

    assert first == second
    assert (tmp_path / "a" / "manifest.csv").read_bytes() == (tmp_path / "b" / "manifest.csv").read_bytes()
    for s in first:
        assert (tmp_path / "a" / s.image_path).read_bytes() == (tmp_path / "b" / s.image_path).read_bytes()


def test_synth_balanced_classes(tmp_path):
    samples = synth_corpus(SynthConfig(n_samples=600, height=4, width=4), tmp_path)
    counts = np.bincount([s.label_b for s in samples], minlength=NUM_CLASSES)
    assert counts.tolist() == [100] * NUM_CLASSES
    assert all(s.label_a == int(s.label_b > 0) for s in samples)
    assert samples[0].id == "s0-000000"
    assert len(CLASS_NAMES) == NUM_CLASSES


def test_synth_config_validation():
    with pytest.raises(ValidationError):
        SynthConfig(n_samples=601)
    with pytest.raises(ValidationError):
        SynthConfig(amplitude=1.5)
    with pytest.raises(ValidationError):
        SynthConfig(unknown=1)


def test_zero_amplitude_removes_fingerprint():
    cfg = SynthConfig(n_samples=6, height=8, width=8, amplitude=0.0, noise_sigma=0.0)
    real = synth_image("a cat on a bench", 0, cfg, np.random.default_rng(0))
    for cls in range(1, NUM_CLASSES):
        np.testing.assert_array_equal(synth_image("a cat on a bench", cls, cfg, np.random.default_rng(0)), real)


def test_fingerprint_survives_patch_averaging():
    """Every 4x4 patch carries the same fingerprint, so the patch mean keeps it."""
    for cls in range(1, NUM_CLASSES):
        plane = np.zeros((1, 3, 16, 16))
        plane[0, FINGERPRINT_CHANNEL] = fingerprint(cls, 0.25, 16, 16)
        patches = extract_patches(plane, 4)[0]
        np.testing.assert_allclose(patches, np.broadcast_to(patches[0], patches.shape), atol=1e-12)
        assert np.abs(patches[0]).max() > 0.1


# ---------------------------------------------------------------- batches

def test_encode_samples_resolves_paths_and_labels(tmp_path):
    samples = synth_corpus(SynthConfig(n_samples=6, height=8, width=8), tmp_path)
    vocab = build_vocab(samples)

    batch = encode_samples(samples, tmp_path, vocab, seq_len=10, image_size=(4, 4))
    assert batch.ids.shape == (6, 10)
    assert batch.images.shape == (6, 3, 4, 4)
    assert batch.label_b.tolist() == [0, 1, 2, 3, 4, 5]
    assert batch.sample_ids == [s.id for s in samples]

    unlabeled = encode_samples(strip_labels(samples), tmp_path, vocab, seq_len=10, image_size=(8, 8))
    assert not unlabeled.has_labels

    sub = batch.subset([4, 1])
    assert sub.sample_ids == [samples[4].id, samples[1].id]
    assert sub.label_b.tolist() == [4, 1]


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
