//! Snake and Hidden Snake grid datasets.
//!
//! A snake is a self-avoiding walk of ten cells on a grid. Every snake cell
//! is colored with the direction of the move leaving it (the last cell
//! repeats the direction of the final move) and labeled with its position
//! along the walk, tail = 1 and head = 10; background cells are labeled 0.
//! A Hidden Snake sample may instead be a snake image with one cell
//! recolored so that no valid snake remains, labeled all background.

use std::fmt;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constraints::NodeStateConstraint;
use crate::crf_model::{Labeling, Matrix, TypeSchema, TypedGraphInstance};
use crate::error::{Error, Result};

pub const SNAKE_LENGTH: usize = 10;
pub const PIXEL_LABELS: usize = SNAKE_LENGTH + 1;
pub const COLORS: usize = 5;
pub const PIXEL_FEATURES: usize = 9 * COLORS;
pub const EDGE_FEATURES: usize = 4 * PIXEL_FEATURES;
pub const IMAGE_FEATURES: usize = 7;
pub const PIXEL_TYPE: usize = 0;
pub const IMAGE_TYPE: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Color {
    Up,
    Down,
    Left,
    Right,
    Bg,
}

impl Color {
    pub const DIRECTIONS: [Color; 4] = [Color::Up, Color::Down, Color::Left, Color::Right];

    /// Position in the one-hot encoding.
    pub fn index(self) -> usize {
        match self {
            Color::Up => 0,
            Color::Down => 1,
            Color::Left => 2,
            Color::Right => 3,
            Color::Bg => 4,
        }
    }

    /// Row and column step of a direction color.
    pub fn step(self) -> Option<(isize, isize)> {
        match self {
            Color::Up => Some((-1, 0)),
            Color::Down => Some((1, 0)),
            Color::Left => Some((0, -1)),
            Color::Right => Some((0, 1)),
            Color::Bg => None,
        }
    }

    pub fn code(self) -> char {
        match self {
            Color::Up => 'U',
            Color::Down => 'D',
            Color::Left => 'L',
            Color::Right => 'R',
            Color::Bg => '.',
        }
    }

    pub fn from_code(c: char) -> Option<Color> {
        match c {
            'U' => Some(Color::Up),
            'D' => Some(Color::Down),
            'L' => Some(Color::Left),
            'R' => Some(Color::Right),
            '.' => Some(Color::Bg),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnakeImage {
    height: usize,
    width: usize,
    colors: Vec<Color>,
    labels: Vec<u8>,
}

impl SnakeImage {
    pub fn new(height: usize, width: usize, colors: Vec<Color>, labels: Vec<u8>) -> Result<Self> {
        if colors.len() != height * width || labels.len() != height * width {
            return Err(Error::Dimension(format!(
                "{}x{} image with {} colors and {} labels",
                height,
                width,
                colors.len(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l as usize > SNAKE_LENGTH) {
            return Err(Error::InvalidArgument(format!("pixel label {bad} out of range")));
        }
        Ok(SnakeImage {
            height,
            width,
            colors,
            labels,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn num_cells(&self) -> usize {
        self.height * self.width
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn color(&self, r: usize, c: usize) -> Color {
        self.colors[r * self.width + c]
    }

    /// Color at a possibly out-of-grid position; outside reads as background.
    fn color_or_bg(&self, r: isize, c: isize) -> Color {
        if r < 0 || c < 0 || r as usize >= self.height || c as usize >= self.width {
            Color::Bg
        } else {
            self.color(r as usize, c as usize)
        }
    }

    pub fn contains_snake(&self) -> bool {
        contains_snake(self.height, self.width, &self.colors)
    }
}

impl fmt::Display for SnakeImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.height {
            let row: String = (0..self.width).map(|c| self.color(r, c).code()).collect();
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImageLabel {
    Snake,
    NoSnake,
}

impl ImageLabel {
    /// Label index of the image node: 0 = Snake, 1 = NoSnake.
    pub fn index(self) -> usize {
        match self {
            ImageLabel::Snake => 0,
            ImageLabel::NoSnake => 1,
        }
    }

    pub fn from_index(i: usize) -> ImageLabel {
        if i == 0 {
            ImageLabel::Snake
        } else {
            ImageLabel::NoSnake
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HiddenSnakeSample {
    pub image: SnakeImage,
    pub image_label: ImageLabel,
}

const MOVES: [Color; 4] = Color::DIRECTIONS;

/// Draws a snake image from a seed.
pub fn generate_snake(seed: u64) -> SnakeImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_snake_with(&mut rng)
}

/// Draws a uniformly random self-avoiding walk of ten cells by rejection
/// and renders it cropped to its bounding box plus a one-cell margin.
pub fn generate_snake_with<R: Rng + ?Sized>(rng: &mut R) -> SnakeImage {
    loop {
        let moves: Vec<Color> = (0..SNAKE_LENGTH - 1)
            .map(|_| *MOVES.choose(rng).expect("non-empty"))
            .collect();
        if let Some(img) = render_walk(&moves) {
            return img;
        }
    }
}

/// Renders a walk given by its nine moves; `None` if it crosses itself.
pub fn render_walk(moves: &[Color]) -> Option<SnakeImage> {
    let mut cells: Vec<(isize, isize)> = vec![(0, 0)];
    for m in moves {
        let (dr, dc) = m.step()?;
        let (r, c) = *cells.last().expect("non-empty");
        let next = (r + dr, c + dc);
        if cells.contains(&next) {
            return None;
        }
        cells.push(next);
    }
    let rmin = cells.iter().map(|p| p.0).min()?;
    let rmax = cells.iter().map(|p| p.0).max()?;
    let cmin = cells.iter().map(|p| p.1).min()?;
    let cmax = cells.iter().map(|p| p.1).max()?;
    let height = (rmax - rmin + 3) as usize;
    let width = (cmax - cmin + 3) as usize;
    let mut colors = vec![Color::Bg; height * width];
    let mut labels = vec![0u8; height * width];
    for (i, &(r, c)) in cells.iter().enumerate() {
        let idx = (r - rmin + 1) as usize * width + (c - cmin + 1) as usize;
        // the head keeps the direction of the last move
        colors[idx] = moves[i.min(moves.len() - 1)];
        labels[idx] = (i + 1) as u8;
    }
    Some(SnakeImage {
        height,
        width,
        colors,
        labels,
    })
}

/// Whether the grid holds exactly ten colored cells that form one snake:
/// following the colors from some start visits all of them without
/// revisiting. The head's own color is not constrained, since no move
/// leaves it.
pub fn contains_snake(height: usize, width: usize, colors: &[Color]) -> bool {
    if colors.len() != height * width {
        return false;
    }
    let snake_cells: Vec<usize> = (0..colors.len()).filter(|&i| colors[i] != Color::Bg).collect();
    if snake_cells.len() != SNAKE_LENGTH {
        return false;
    }
    let mut visited = vec![false; colors.len()];
    'start: for &start in &snake_cells {
        visited.iter_mut().for_each(|v| *v = false);
        visited[start] = true;
        let mut current = start;
        for _ in 1..SNAKE_LENGTH {
            let (dr, dc) = colors[current].step().expect("snake cell");
            let r = (current / width) as isize + dr;
            let c = (current % width) as isize + dc;
            if r < 0 || c < 0 || r as usize >= height || c as usize >= width {
                continue 'start;
            }
            let next = r as usize * width + c as usize;
            if colors[next] == Color::Bg || visited[next] {
                continue 'start;
            }
            visited[next] = true;
            current = next;
        }
        return true;
    }
    false
}

/// Recolors one random snake cell with one of the three other directions.
/// Returns `None` when the result still contains a snake.
pub fn corrupt(img: &SnakeImage, seed: u64) -> Option<HiddenSnakeSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    corrupt_with(img, &mut rng)
}

pub fn corrupt_with<R: Rng + ?Sized>(img: &SnakeImage, rng: &mut R) -> Option<HiddenSnakeSample> {
    let snake_cells: Vec<usize> = (0..img.colors.len())
        .filter(|&i| img.colors[i] != Color::Bg)
        .collect();
    let &cell = snake_cells.choose(rng)?;
    let others: Vec<Color> = Color::DIRECTIONS
        .iter()
        .copied()
        .filter(|&c| c != img.colors[cell])
        .collect();
    let &color = others.choose(rng)?;
    recolor(img, cell, color)
}

/// Deterministic recoloring of one cell; `None` if a snake survives.
pub fn recolor(img: &SnakeImage, cell: usize, color: Color) -> Option<HiddenSnakeSample> {
    let mut colors = img.colors.clone();
    colors[cell] = color;
    if contains_snake(img.height, img.width, &colors) {
        return None;
    }
    Some(HiddenSnakeSample {
        image: SnakeImage {
            height: img.height,
            width: img.width,
            labels: vec![0; colors.len()],
            colors,
        },
        image_label: ImageLabel::NoSnake,
    })
}

/// Generates `n_snakes` snake images; with `hidden`, each one is followed by
/// its corrupted copy unless the corruption was discarded.
pub fn generate_dataset(n_snakes: usize, hidden: bool, seed: u64) -> Vec<HiddenSnakeSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(if hidden { 2 * n_snakes } else { n_snakes });
    for _ in 0..n_snakes {
        let image = generate_snake_with(&mut rng);
        let damaged = if hidden { corrupt_with(&image, &mut rng) } else { None };
        out.push(HiddenSnakeSample {
            image,
            image_label: ImageLabel::Snake,
        });
        out.extend(damaged);
    }
    out
}

const NEIGHBORHOOD: [(isize, isize); 9] = [
    (0, 0),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
];

/// Pixel features: per cell, the one-hot colors of the cell and its
/// 8-neighborhood (self, N, NE, E, SE, S, SW, W, NW), outside reading as
/// background. Edges join 4-neighbors (left to right, top to bottom); an
/// edge feature is `[top | bottom | left | right]` with the two blocks that
/// match the edge orientation filled with the endpoint features.
pub fn featurize_pixels(img: &SnakeImage) -> (Matrix, Vec<(usize, usize)>, Matrix) {
    let n = img.num_cells();
    let mut nodes = Matrix::zeros(n, PIXEL_FEATURES);
    for r in 0..img.height {
        for c in 0..img.width {
            let row = nodes.row_mut(r * img.width + c);
            for (slot, (dr, dc)) in NEIGHBORHOOD.iter().enumerate() {
                let color = img.color_or_bg(r as isize + dr, c as isize + dc);
                row[slot * COLORS + color.index()] = 1.0;
            }
        }
    }

    let mut edges = Vec::new();
    // block offsets inside an edge feature
    const TOP: usize = 0;
    const BOTTOM: usize = PIXEL_FEATURES;
    const LEFT: usize = 2 * PIXEL_FEATURES;
    const RIGHT: usize = 3 * PIXEL_FEATURES;
    let mut blocks = Vec::new();
    for r in 0..img.height {
        for c in 0..img.width {
            let v = r * img.width + c;
            if c + 1 < img.width {
                edges.push((v, v + 1));
                blocks.push((LEFT, RIGHT));
            }
            if r + 1 < img.height {
                edges.push((v, v + img.width));
                blocks.push((TOP, BOTTOM));
            }
        }
    }
    let mut edge_features = Matrix::zeros(edges.len(), EDGE_FEATURES);
    for (e, (&(a, b), &(first, second))) in edges.iter().zip(&blocks).enumerate() {
        let row = edge_features.row_mut(e);
        row[first..first + PIXEL_FEATURES].copy_from_slice(nodes.row(a));
        row[second..second + PIXEL_FEATURES].copy_from_slice(nodes.row(b));
    }
    (nodes, edges, edge_features)
}

/// `(bbox height, bbox width, #UP, #DOWN, #LEFT, #RIGHT, #BG)`; the bounding
/// box is that of the colored cells (0 x 0 when there are none).
pub fn featurize_image(img: &SnakeImage) -> [f64; IMAGE_FEATURES] {
    let mut counts = [0usize; COLORS];
    let (mut rmin, mut rmax, mut cmin, mut cmax) = (usize::MAX, 0, usize::MAX, 0);
    for r in 0..img.height {
        for c in 0..img.width {
            let color = img.color(r, c);
            counts[color.index()] += 1;
            if color != Color::Bg {
                rmin = rmin.min(r);
                rmax = rmax.max(r);
                cmin = cmin.min(c);
                cmax = cmax.max(c);
            }
        }
    }
    let (h, w) = if rmin == usize::MAX {
        (0, 0)
    } else {
        (rmax - rmin + 1, cmax - cmin + 1)
    };
    [
        h as f64,
        w as f64,
        counts[0] as f64,
        counts[1] as f64,
        counts[2] as f64,
        counts[3] as f64,
        counts[4] as f64,
    ]
}

/// Schema of the single-type grid CRF: 11 labels, 45 node and 180 edge
/// features.
pub fn single_type_schema() -> TypeSchema {
    TypeSchema::single(PIXEL_LABELS, PIXEL_FEATURES, EDGE_FEATURES).expect("valid schema")
}

/// Schema of the pixel + image model.
pub fn typed_schema() -> TypeSchema {
    TypeSchema::new(
        vec![PIXEL_LABELS, 2],
        vec![PIXEL_FEATURES, IMAGE_FEATURES],
        vec![EDGE_FEATURES, PIXEL_FEATURES, 0, 0],
    )
    .expect("valid schema")
}

fn pixel_labels(img: &SnakeImage) -> Vec<usize> {
    img.labels.iter().map(|&l| l as usize).collect()
}

pub fn build_single_type_instance(img: &SnakeImage) -> (TypedGraphInstance, Labeling) {
    let (nodes, edges, edge_features) = featurize_pixels(img);
    let g = TypedGraphInstance::new(single_type_schema(), vec![nodes], vec![edges], vec![edge_features])
        .expect("featurization matches the schema");
    (g, Labeling::new(vec![pixel_labels(img)]))
}

/// Pixels plus one image node; every pixel links to the image node with its
/// own 45-dim feature as the edge feature.
pub fn build_typed_instance(sample: &HiddenSnakeSample) -> (TypedGraphInstance, Labeling) {
    let img = &sample.image;
    let (nodes, grid_edges, grid_features) = featurize_pixels(img);
    let image_node = Matrix::from_vec(1, IMAGE_FEATURES, featurize_image(img).to_vec())
        .expect("seven image features");
    let to_image: Vec<(usize, usize)> = (0..img.num_cells()).map(|v| (v, 0)).collect();
    let to_image_features = nodes.clone();
    let g = TypedGraphInstance::new(
        typed_schema(),
        vec![nodes, image_node],
        vec![grid_edges, to_image, vec![], vec![]],
        vec![
            grid_features,
            to_image_features,
            Matrix::zeros(0, 0),
            Matrix::zeros(0, 0),
        ],
    )
    .expect("featurization matches the schema");
    let y = Labeling::new(vec![pixel_labels(img), vec![sample.image_label.index()]]);
    (g, y)
}

/// One AT_MOST_ONE constraint per snake label 1..=10 over all pixel nodes.
pub fn make_constraints(sample: &HiddenSnakeSample) -> Vec<NodeStateConstraint> {
    let n = sample.image.num_cells();
    (1..=SNAKE_LENGTH)
        .map(|s| NodeStateConstraint::at_most_one(PIXEL_TYPE, 0..n, s))
        .collect()
}

/// Writes records as `H W S|N`, `H` rows of color codes, `H` rows of
/// space-separated labels, and a blank line.
pub fn write_dataset<W: Write>(mut out: W, samples: &[HiddenSnakeSample]) -> Result<()> {
    for s in samples {
        let img = &s.image;
        let tag = match s.image_label {
            ImageLabel::Snake => 'S',
            ImageLabel::NoSnake => 'N',
        };
        writeln!(out, "{} {} {}", img.height, img.width, tag)?;
        write!(out, "{img}")?;
        for r in 0..img.height {
            let row: Vec<String> = img.labels[r * img.width..(r + 1) * img.width]
                .iter()
                .map(ToString::to_string)
                .collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_dataset<R: BufRead>(input: R) -> Result<Vec<HiddenSnakeSample>> {
    let lines: Vec<String> = input.lines().collect::<std::io::Result<_>>()?;
    let mut samples = Vec::new();
    let mut i = 0;
    let err = |line: usize, message: String| Error::Parse { line: line + 1, message };
    while i < lines.len() {
        if lines[i].trim().is_empty() {
            i += 1;
            continue;
        }
        let header: Vec<&str> = lines[i].split_whitespace().collect();
        if header.len() != 3 {
            return Err(err(i, format!("expected `H W S|N`, found `{}`", lines[i])));
        }
        let height: usize = header[0].parse().map_err(|_| err(i, "bad height".into()))?;
        let width: usize = header[1].parse().map_err(|_| err(i, "bad width".into()))?;
        let image_label = match header[2] {
            "S" => ImageLabel::Snake,
            "N" => ImageLabel::NoSnake,
            other => return Err(err(i, format!("image label `{other}` is not S or N"))),
        };
        let header_line = i;
        i += 1;
        let mut colors = Vec::with_capacity(height * width);
        for _ in 0..height {
            let line = lines
                .get(i)
                .ok_or_else(|| err(i, "truncated record: missing color row".into()))?;
            let row: Vec<Color> = line
                .trim()
                .chars()
                .map(|ch| Color::from_code(ch).ok_or_else(|| err(i, format!("bad color code `{ch}`"))))
                .collect::<Result<_>>()?;
            if row.len() != width {
                return Err(err(i, format!("color row has {} cells, expected {width}", row.len())));
            }
            colors.extend(row);
            i += 1;
        }
        let mut labels = Vec::with_capacity(height * width);
        for _ in 0..height {
            let line = lines
                .get(i)
                .ok_or_else(|| err(i, "truncated record: missing label row".into()))?;
            let row: Vec<u8> = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<u8>()
                        .ok()
                        .filter(|&l| l as usize <= SNAKE_LENGTH)
                        .ok_or_else(|| err(i, format!("bad pixel label `{t}`")))
                })
                .collect::<Result<_>>()?;
            if row.len() != width {
                return Err(err(i, format!("label row has {} cells, expected {width}", row.len())));
            }
            labels.extend(row);
            i += 1;
        }
        let image = SnakeImage::new(height, width, colors, labels)
            .map_err(|e| err(header_line, e.to_string()))?;
        samples.push(HiddenSnakeSample { image, image_label });
    }
    Ok(samples)
}

pub fn save_dataset(path: &std::path::Path, samples: &[HiddenSnakeSample]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_dataset(&mut w, samples)?;
    w.flush()?;
    Ok(())
}

pub fn load_dataset(path: &std::path::Path) -> Result<Vec<HiddenSnakeSample>> {
    let file = std::fs::File::open(path)?;
    read_dataset(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn straight() -> SnakeImage {
        render_walk(&[Color::Right; 9]).unwrap()
    }

    #[test]
    fn straight_walk_geometry() {
        let img = straight();
        assert_eq!((img.height(), img.width()), (3, 12));
        for c in 1..=10 {
            assert_eq!(img.color(1, c), Color::Right);
            assert_eq!(img.labels()[12 + c], c as u8);
        }
        assert!(img.contains_snake());
    }

    #[test]
    fn broken_straight_snake() {
        let img = straight();
        let mut colors = img.colors().to_vec();
        colors[12 + 5] = Color::Up;
        assert!(!contains_snake(3, 12, &colors));
        assert!(!contains_snake(3, 4, &[Color::Bg; 12]));
        // recoloring the head leaves the path intact
        assert!(recolor(&img, 12 + 10, Color::Down).is_none());
        assert!(recolor(&img, 12 + 1, Color::Down).is_some());
    }

    #[test]
    fn self_crossing_walk_is_rejected() {
        use Color::*;
        assert!(render_walk(&[Right, Down, Left, Up, Right, Right, Right, Right, Right]).is_none());
    }

    #[test]
    fn image_features() {
        let img = SnakeImage::new(3, 4, vec![Color::Bg; 12], vec![0; 12]).unwrap();
        assert_eq!(featurize_image(&img), [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 12.0]);
        assert_eq!(
            featurize_image(&straight()),
            [1.0, 10.0, 0.0, 0.0, 0.0, 10.0, 26.0]
        );
    }

    #[test]
    fn pixel_features_of_single_bg_cell() {
        let img = SnakeImage::new(1, 1, vec![Color::Bg], vec![0]).unwrap();
        let (nodes, edges, edge_features) = featurize_pixels(&img);
        assert_eq!(nodes.rows(), 1);
        for slot in 0..9 {
            for c in 0..COLORS {
                let expected = if c == Color::Bg.index() { 1.0 } else { 0.0 };
                assert_eq!(nodes.row(0)[slot * COLORS + c], expected);
            }
        }
        assert!(edges.is_empty());
        assert_eq!(edge_features.rows(), 0);
    }

    #[test]
    fn edge_blocks() {
        let img = straight();
        let (nodes, edges, ef) = featurize_pixels(&img);
        assert_eq!(edges.len(), 3 * 11 + 2 * 12);
        for (e, &(a, b)) in edges.iter().enumerate() {
            let row = ef.row(e);
            let horizontal = b == a + 1;
            let (x, y) = if horizontal { (2, 3) } else { (0, 1) };
            assert_eq!(&row[x * 45..(x + 1) * 45], nodes.row(a));
            assert_eq!(&row[y * 45..(y + 1) * 45], nodes.row(b));
            let nonzero_blocks = (0..4)
                .filter(|k| row[k * 45..(k + 1) * 45].iter().any(|&v| v != 0.0))
                .count();
            assert_eq!(nonzero_blocks, 2);
        }
    }

    #[test]
    fn dataset_round_trip_and_errors() {
        let data = generate_dataset(5, true, 3);
        let mut buf = Vec::new();
        write_dataset(&mut buf, &data).unwrap();
        assert_eq!(read_dataset(buf.as_slice()).unwrap(), data);
        assert!(read_dataset("".as_bytes()).unwrap().is_empty());

        let text = String::from_utf8(buf).unwrap();
        let first_record_lines = 1 + 2 * data[0].image.height();
        let cut: String = text
            .lines()
            .take(first_record_lines - 1)
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(matches!(read_dataset(cut.as_bytes()), Err(Error::Parse { .. })));
        assert!(matches!(
            read_dataset("1 1 X\n.\n0\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_dataset("1 1 S\nQ\n0\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn snake_constraints() {
        let sample = HiddenSnakeSample {
            image: straight(),
            image_label: ImageLabel::Snake,
        };
        let cs = make_constraints(&sample);
        assert_eq!(cs.len(), 10);
        assert!(cs.iter().all(|c| c.literals().len() == 36));
        let (_, y) = build_single_type_instance(&sample.image);
        assert!(crate::constraints::check(&cs, &y));
    }

    #[test]
    fn typed_instance_shape() {
        let sample = HiddenSnakeSample {
            image: straight(),
            image_label: ImageLabel::Snake,
        };
        let (g, y) = build_typed_instance(&sample);
        assert_eq!(g.num_nodes(IMAGE_TYPE), 1);
        assert_eq!(g.edges(PIXEL_TYPE, IMAGE_TYPE).len(), 36);
        assert_eq!(y.labels(IMAGE_TYPE), &[0]);
        assert_eq!(g.schema().param_count_typed(true), 23279);
    }
}
