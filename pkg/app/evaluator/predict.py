"""Label prediction with a fine-tuned model"""
import numpy as np

from datapipe.corpus import word_windows
from datapipe.registry import O_ID
from model.config import BIDIRECTIONAL
from model.transformer import forward, tag_logits
from tokenizer.vocab import encode


def predict_ids(params, ids):
    """Arg-max label id per position"""
    hidden = forward(params, ids, BIDIRECTIONAL)
    return np.argmax(tag_logits(params, hidden), axis=1)


def predict_sequence(params, seq):
    return predict_ids(params, seq.ids)


def predict_word_labels(params, vocab, plain):
    """
    One label id per word of `plain`, read off each word's last subtoken.

    Long texts are cut into word windows that fit the model; a word too
    long for any window gets O.
    """
    words = plain.split()
    labels = [O_ID] * len(words)
    for start, end in word_windows(plain, vocab, params.config.max_seq):
        encoding = encode(' '.join(words[start:end]), vocab)
        predicted = predict_ids(params, encoding.ids)
        for pos, final in enumerate(encoding.word_final):
            if final:
                labels[start + encoding.word_index[pos]] = int(predicted[pos])
    return labels
