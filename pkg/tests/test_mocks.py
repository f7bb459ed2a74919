import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modalflow import mocks
from modalflow.fingerprints import cosine, embed_image, embed_text
from modalflow.media import AudioBuf, ImageBuf, VideoBuf, content_hash
from modalflow.mocks import (
    DEFAULT_CODEC,
    BadDimensions,
    BadFrameCount,
    BadFrameLength,
    EmptyKb,
    KbEntry,
    TextTooLong,
    mock_asr,
    mock_chat,
    mock_image_edit,
    mock_image_to_text,
    mock_style_transfer,
    mock_text_gen,
    mock_text_to_image,
    mock_text_to_video,
    mock_translate,
    mock_tts,
    mock_video_summary,
    prompt_expand,
)

tone_text = st.text(alphabet=DEFAULT_CODEC.alphabet, min_size=0, max_size=200)


class TestTextGen:
    def test_deterministic(self):
        assert mock_text_gen("once", seed=7, length=50) == mock_text_gen("once", seed=7, length=50)

    def test_extends_prompt(self):
        out = mock_text_gen("the story", seed=0, length=30)
        assert out.startswith("the story")
        assert len(out) == len("the story") + 30

    def test_chat_reply_only(self):
        reply = mock_chat("hello there", seed=1, length=20)
        assert len(reply) == 20


class TestToneCodec:
    def test_alphabet_layout(self):
        assert len(DEFAULT_CODEC.alphabet) == 32
        assert DEFAULT_CODEC.alphabet[26] == " "
        assert DEFAULT_CODEC.alphabet[27:] == ".,!?-"
        freqs = [DEFAULT_CODEC.freq(i) for i in range(32)]
        assert len(set(freqs)) == 32
        assert max(freqs) < 8000

    def test_hello_world_round_trip(self):
        s = "hello world."
        assert mock_asr(mock_tts(s)) == s

    def test_two_chars_3200_samples(self):
        assert mock_tts("ab").n_samples == 3200

    def test_zero_frame_decodes_to_a(self):
        assert mock_asr(AudioBuf.from_array(np.zeros(1600, dtype=np.int16))) == "a"

    def test_text_too_long(self):
        with pytest.raises(TextTooLong):
            mock_tts("a" * 4097)

    def test_bad_frame_length(self):
        with pytest.raises(BadFrameLength):
            mock_asr(AudioBuf.from_array(np.zeros(1601, dtype=np.int16)))

    def test_out_of_alphabet_maps_to_space(self):
        assert mock_asr(mock_tts("A;b")) == "a b"

    @given(tone_text)
    @settings(max_examples=60, deadline=None)
    def test_round_trip_property(self, s):
        assert mock_asr(mock_tts(s)) == s


class TestTextToImage:
    def test_deterministic_bytes(self):
        a = mock_text_to_image("cat", seed=0, width=64, height=64)
        b = mock_text_to_image("cat", seed=0, width=64, height=64)
        assert a == b

    def test_different_prompts_differ(self):
        a = mock_text_to_image("cat", seed=0, width=64, height=64)
        b = mock_text_to_image("dog", seed=0, width=64, height=64)
        assert content_hash(a) != content_hash(b)
        frac = np.mean(a.to_array() != b.to_array())
        assert frac >= 0.01

    def test_bad_dimensions(self):
        with pytest.raises(BadDimensions):
            mock_text_to_image("x", width=4, height=64)
        with pytest.raises(BadDimensions):
            mock_text_to_image("x", width=64, height=2000)


class TestStyleTransfer:
    def mid_image(self, seed, lo, hi, w=32, h=32):
        rng = np.random.default_rng(seed)
        return ImageBuf.from_array(rng.integers(lo, hi, (h, w, 3), dtype=np.uint8))

    def test_strength_zero_identity(self):
        content = self.mid_image(0, 60, 200)
        style = self.mid_image(1, 60, 200)
        assert mock_style_transfer(content, style, strength=0.0) == content

    def test_style_equals_content_identity(self):
        content = self.mid_image(2, 60, 200)
        for strength in (0.0, 0.3, 1.0):
            assert mock_style_transfer(content, content, strength) == content

    def test_full_strength_matches_style_means(self):
        content = self.mid_image(3, 100, 156)
        style = self.mid_image(4, 80, 121)
        out = mock_style_transfer(content, style, strength=1.0).to_array().astype(float)
        s = style.to_array().astype(float)
        for ch in range(3):
            assert abs(out[:, :, ch].mean() - s[:, :, ch].mean()) < 1.0


class TestImageToText:
    def test_black_image(self):
        img = ImageBuf(16, 16, bytes(16 * 16 * 3))
        assert mock_image_to_text(img) == "a dark red flat scene"

    def test_white_image(self):
        img = ImageBuf(16, 16, bytes([255]) * (16 * 16 * 3))
        assert mock_image_to_text(img) == "a bright red flat scene"

    def test_green_textured(self):
        rng = np.random.default_rng(0)
        arr = np.zeros((16, 16, 3), dtype=np.uint8)
        arr[:, :, 1] = rng.integers(60, 255, (16, 16))
        caption = mock_image_to_text(ImageBuf.from_array(arr))
        assert "green" in caption and "textured" in caption

    def test_deterministic(self):
        img = mock_text_to_image("scene", seed=3)
        assert mock_image_to_text(img) == mock_image_to_text(img)


class TestVideo:
    def test_frames_differ(self):
        video = mock_text_to_video("run", seed=0, n_frames=2, width=32, height=32)
        assert content_hash(video.frames[0]) != content_hash(video.frames[1])
        delta = np.abs(
            video.frames[0].to_array().astype(int) - video.frames[1].to_array().astype(int)
        ).mean()
        assert delta > 0

    def test_deterministic(self):
        a = mock_text_to_video("run", seed=1, n_frames=3, width=16, height=16)
        b = mock_text_to_video("run", seed=1, n_frames=3, width=16, height=16)
        assert [content_hash(f) for f in a.frames] == [content_hash(f) for f in b.frames]

    def test_frame_count_bounds(self):
        with pytest.raises(BadFrameCount):
            mock_text_to_video("x", n_frames=1)
        with pytest.raises(BadFrameCount):
            mock_text_to_video("x", n_frames=257)

    def test_summary_of_repeated_frame(self):
        frame = mock_text_to_image("pond", seed=2, width=32, height=32)
        video = VideoBuf(frames=(frame, frame, frame))
        assert mock_video_summary(video) == "summary: " + mock_image_to_text(frame)

    def test_medoid_against_brute_force(self):
        video = mock_text_to_video("walk", seed=5, n_frames=5, width=32, height=32)
        vecs = [embed_image(f).values.astype(np.float64) for f in video.frames]
        totals = [sum(np.linalg.norm(v - w) for w in vecs) for v in vecs]
        medoid = min(range(5), key=lambda i: (totals[i], i))
        assert mock_video_summary(video) == "summary: " + mock_image_to_text(video.frames[medoid])


class TestTranslate:
    def test_empty_string(self):
        assert mock_translate("", "en-zh") == ""
        assert mock_translate("", "zh-en") == ""

    def test_lexicon_lookup(self):
        assert mock_translate("water", "en-zh") == "水"
        assert mock_translate("水", "zh-en") == "water"

    def test_unknown_token_passes_through(self):
        assert mock_translate("qqq", "en-zh") == "qqq"
        assert mock_translate("qqq", "zh-en") == "qqq"

    def test_sentence_substitution(self):
        out = mock_translate("the cat and the dog", "en-zh")
        assert "猫" in out and "狗" in out and "the" in out

    def test_punctuation_preserved(self):
        assert mock_translate("water!", "en-zh") == "水!"

    def test_lexicon_size(self):
        assert len(mocks._lexicon()) == 200
        assert len({en for en, _ in mocks._lexicon()}) == 200
        assert len({zh for _, zh in mocks._lexicon()}) == 200


class TestPromptExpand:
    def small_kb(self):
        return tuple(
            KbEntry(keyword=f"topic {i} {'xyz'[i % 3]}", tags=(f"tag{i}a", f"tag{i}b"))
            for i in range(20)
        )

    def test_exact_keyword_ranks_first(self):
        kb = self.small_kb()
        out = prompt_expand("topic 7 y", kb=kb, k=1)
        assert out == "topic 7 y, tag7a, tag7b"

    def test_k_larger_than_kb(self):
        kb = self.small_kb()[:3]
        out = prompt_expand("topic", kb=kb, k=99)
        for i in range(3):
            assert f"tag{i}a" in out

    def test_matches_brute_force_ranking(self):
        kb = self.small_kb()
        prompt = "topic 3 x"
        query = embed_text(prompt)
        sims = [cosine(query, embed_text(e.keyword)) for e in kb]
        order = sorted(range(len(kb)), key=lambda i: (-sims[i], i))[:5]
        expect_tags = []
        for i in order:
            expect_tags.extend(kb[i].tags)
        assert prompt_expand(prompt, kb=kb, k=5) == prompt + ", " + ", ".join(expect_tags)

    def test_empty_kb(self):
        with pytest.raises(EmptyKb):
            prompt_expand("x", kb=())

    def test_bundled_kb_loads(self):
        out = prompt_expand("starry night", k=1)
        assert out.startswith("starry night, ")


class TestPurity:
    @given(st.text(min_size=1, max_size=40), st.integers(0, 50))
    @settings(max_examples=25, deadline=None)
    def test_text_to_image_pure(self, prompt, seed):
        assert mock_text_to_image(prompt, seed, 16, 16) == mock_text_to_image(prompt, seed, 16, 16)

    def test_image_edit_pure_and_clamped(self):
        img = mock_text_to_image("edit me", seed=0, width=16, height=16)
        assert mock_image_edit(img, 40) == mock_image_edit(img, 40)
        arr = mock_image_edit(img, 300).to_array()
        assert arr.max() == 255
