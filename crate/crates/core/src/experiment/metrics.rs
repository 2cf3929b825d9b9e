use crate::error::{Error, Result};
use crate::snake_data::{HiddenSnakeSample, ImageLabel};

fn check_lengths(pred: usize, gold: usize, what: &str) -> Result<()> {
    if pred != gold {
        return Err(Error::Dimension(format!("{pred} predicted {what} for {gold} gold {what}")));
    }
    Ok(())
}

/// Fraction of cells whose label is correct; 0 for no cells.
pub fn metric_pixel_accuracy(pred: &[usize], gold: &[usize]) -> Result<f64> {
    check_lengths(pred.len(), gold.len(), "cells")?;
    if gold.is_empty() {
        return Ok(0.0);
    }
    let correct = pred.iter().zip(gold).filter(|(a, b)| a == b).count();
    Ok(correct as f64 / gold.len() as f64)
}

/// Accuracy restricted to cells whose gold label is a snake label (1..=10).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnakeCellAccuracy {
    /// 0 when `defined` is false.
    pub value: f64,
    /// Whether any gold snake cell exists.
    pub defined: bool,
    pub cells: usize,
}

pub fn metric_snake_cell_accuracy(pred: &[usize], gold: &[usize]) -> Result<SnakeCellAccuracy> {
    check_lengths(pred.len(), gold.len(), "cells")?;
    let (mut cells, mut correct) = (0usize, 0usize);
    for (a, b) in pred.iter().zip(gold) {
        if *b != 0 {
            cells += 1;
            correct += usize::from(a == b);
        }
    }
    Ok(SnakeCellAccuracy {
        value: if cells == 0 { 0.0 } else { correct as f64 / cells as f64 },
        defined: cells > 0,
        cells,
    })
}

pub fn metric_image_accuracy(pred: &[ImageLabel], gold: &[ImageLabel]) -> Result<f64> {
    check_lengths(pred.len(), gold.len(), "images")?;
    if gold.is_empty() {
        return Ok(0.0);
    }
    let correct = pred.iter().zip(gold).filter(|(a, b)| a == b).count();
    Ok(correct as f64 / gold.len() as f64)
}

/// Output of one method on one image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImagePrediction {
    pub height: usize,
    pub width: usize,
    /// Row-major cell labels.
    pub pixels: Option<Vec<usize>>,
    pub image: Option<ImageLabel>,
}

/// All metrics of one method over a test set. Accuracies are `None` when the
/// method does not predict that output.
#[derive(Debug, Clone, PartialEq)]
pub struct Scores {
    pub pixels: usize,
    pub pixel_accuracy: Option<f64>,
    pub snake_cell_accuracy: Option<SnakeCellAccuracy>,
    pub images: usize,
    pub image_accuracy: Option<f64>,
}

pub fn score(preds: &[ImagePrediction], gold: &[HiddenSnakeSample]) -> Result<Scores> {
    check_lengths(preds.len(), gold.len(), "images")?;
    let pixels: usize = gold.iter().map(|s| s.image.num_cells()).sum();
    let has_pixels = preds.iter().any(|p| p.pixels.is_some());
    let has_images = preds.iter().any(|p| p.image.is_some());

    let (pixel_accuracy, snake_cell_accuracy) = if has_pixels {
        let mut flat_pred = Vec::with_capacity(pixels);
        let mut flat_gold = Vec::with_capacity(pixels);
        for (i, (p, g)) in preds.iter().zip(gold).enumerate() {
            let labels = p
                .pixels
                .as_ref()
                .ok_or_else(|| Error::Dimension(format!("image {i} has no pixel prediction")))?;
            if (p.height, p.width) != (g.image.height(), g.image.width()) {
                return Err(Error::Dimension(format!(
                    "image {i}: predicted {}x{}, gold {}x{}",
                    p.height,
                    p.width,
                    g.image.height(),
                    g.image.width()
                )));
            }
            check_lengths(labels.len(), g.image.num_cells(), "cells")?;
            flat_pred.extend_from_slice(labels);
            flat_gold.extend(g.image.labels().iter().map(|&l| l as usize));
        }
        (
            Some(metric_pixel_accuracy(&flat_pred, &flat_gold)?),
            Some(metric_snake_cell_accuracy(&flat_pred, &flat_gold)?),
        )
    } else {
        (None, None)
    };

    let image_accuracy = if has_images {
        let pred: Vec<ImageLabel> = preds
            .iter()
            .enumerate()
            .map(|(i, p)| {
                p.image
                    .ok_or_else(|| Error::Dimension(format!("image {i} has no image label")))
            })
            .collect::<Result<_>>()?;
        let truth: Vec<ImageLabel> = gold.iter().map(|s| s.image_label).collect();
        Some(metric_image_accuracy(&pred, &truth)?)
    } else {
        None
    };

    Ok(Scores {
        pixels,
        pixel_accuracy,
        snake_cell_accuracy,
        images: gold.len(),
        image_accuracy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_examples() {
        let gold = [0, 1, 2, 0];
        assert_eq!(metric_pixel_accuracy(&gold, &gold).unwrap(), 1.0);
        let s = metric_snake_cell_accuracy(&[0, 0, 0, 0], &gold).unwrap();
        assert_eq!((s.value, s.defined, s.cells), (0.0, true, 2));
        let half = metric_snake_cell_accuracy(&[0, 1, 0, 0], &gold).unwrap();
        assert_eq!(half.value, 0.5);
        assert_eq!(metric_pixel_accuracy(&[0, 1, 0, 1], &gold).unwrap(), 0.5);
        let none = metric_snake_cell_accuracy(&[0, 0], &[0, 0]).unwrap();
        assert!(!none.defined);
        assert!(metric_pixel_accuracy(&[0], &gold).is_err());

        use ImageLabel::*;
        assert_eq!(metric_image_accuracy(&[Snake, NoSnake], &[Snake, Snake]).unwrap(), 0.5);
        assert!(metric_image_accuracy(&[Snake], &[]).is_err());
    }
}
